#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <absim/rng.hpp>
#include <absim/types.hpp>

namespace absim {

/// Occupation-number vector over the optical modes.
using FockState = std::vector<int>;

int photon_count(const FockState& s);

std::string fock_to_string(const FockState& s);  // pipe-separated, e.g. 1|0|2

/// Orders states the way enumerate_fock emits them: by photon position,
/// i.e. states with photons in earlier modes first.
struct FockOrder {
  bool operator()(const FockState& a, const FockState& b) const;
};

std::int64_t binomial(int n, int k);

/// All C(m+n-1, n) occupation vectors of n photons over m modes, in
/// FockOrder.
std::vector<FockState> enumerate_fock(int m, int n);

/// <t| evolution(U) |s>: permanent of the submatrix of U with column j
/// taken s_j times and row i taken t_i times, over sqrt of the occupation
/// factorials. Requires equal photon numbers.
cplx transition_amplitude(const CMatrix& u, const FockState& s,
                          const FockState& t);

struct OutputDistribution {
  int total_n = 0;
  /// Lossy distributions also carry outcomes with fewer than total_n
  /// photons (undetected sectors).
  bool includes_loss_sectors = false;
  std::map<FockState, double, FockOrder> entries;

  double total() const;
};

/// Born-rule distribution of |s| photons over all outputs; sums to one for
/// unitary u.
OutputDistribution output_distribution(const CMatrix& u, const FockState& s);

/// Multinomial draw of `shots` samples from output_distribution(u, s);
/// deterministic per seed. States that were never drawn are omitted.
std::map<FockState, std::int64_t, FockOrder> sample_outputs(
    const CMatrix& u, const FockState& s, std::int64_t shots,
    std::uint64_t seed);

}  // namespace absim
