#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <absim/fock.hpp>
#include <absim/mesh.hpp>
#include <absim/qstate.hpp>

namespace absim {

/// A detection pattern on the adaptive modes: occupations summing to r.
using Outcome = FockState;

enum class RuleFamily {
  /// Cascaded slots: theta_i = pi/2 * (photons detected before slot i),
  /// phi fixed. `offset` always-empty positions are prepended to the
  /// outcome when accumulating (connectivity can block leading detectors).
  cascade_pi_half,
  /// Single slot with theta = phi = (a + sum_{t=1..b}(5-t)) / 5 for a pair
  /// of photons detected at positions a < b.
  gaussian_pair,
  /// Pair formula with the (4-t) ramp plus theta = phi = (11 + j)/5 when
  /// both photons land on position j.
  gaussian_pair_bunched,
  explicit_table,
};

struct AngleTableEntry {
  Outcome outcome;
  std::vector<std::pair<double, double>> angles;  // one (theta, phi) per slot
};

struct AdaptiveRule {
  RuleFamily family = RuleFamily::cascade_pi_half;
  int cascade_offset = 0;
  double cascade_phi = kPi / 4;
  std::vector<AngleTableEntry> table;  // explicit_table only
};

/// Full description of one adaptive-sampling experiment.
struct AbsScheme {
  std::string id;
  int m = 0;  // modes
  int n = 0;  // input photons
  int r = 0;  // photons detected adaptively
  FockState input;                 // length m
  std::vector<int> adaptive_modes; // k detector modes
  std::vector<int> output_rails;   // modes carrying the encoded qudit
  bool allow_bunching = false;
  AdaptiveRule rule;
  MeshProgram base_mesh;
  std::vector<int> adaptive_slots;  // cell indices overwritten per outcome
  std::vector<int> assignment;      // outcome index -> rule index (bijection)

  int rail_count() const { return static_cast<int>(output_rails.size()); }
  /// Hilbert-space dimension of the encoded qudit:
  /// C(#rails + (n-r) - 1, n-r).
  int qudit_dim() const;
  int outcome_count() const;
};

void validate_scheme(const AbsScheme& scheme);

/// All admissible patterns of r photons over k slots, in FockOrder;
/// entries capped at one unless bunching is allowed.
std::vector<Outcome> enumerate_patterns(int k, int r, bool allow_bunching);

std::vector<Outcome> enumerate_outcomes(const AbsScheme& scheme);

/// Angles for the adaptive slots given a (rule-side) outcome. The cascade
/// family fills every slot; the gaussian families return one shared pair
/// that realized_unitary broadcasts across slots.
std::vector<std::pair<double, double>> adaptive_angles(const AdaptiveRule& rule,
                                                       const Outcome& outcome,
                                                       int slot_count);

/// Base mesh with the adaptive slots overwritten by the angles the rule
/// assigns to outcome `assignment[index(outcome)]`.
CMatrix realized_unitary(const AbsScheme& scheme, const Outcome& outcome);

/// The d rail-restricted Fock states of n-r photons, in FockOrder.
std::vector<FockState> rail_basis(const AbsScheme& scheme);

struct ConditionalState {
  double probability = 0.0;   // joint post-selection probability
  CVector amplitudes;         // rail-basis amplitudes (normalised)
  DensityMatrix state;        // rank-1 projector onto `amplitudes`
};

/// Ideal (noiseless) conditional qudit state after post-selecting the given
/// adaptive outcome with all remaining photons on the rails.
ConditionalState conditional_state(const AbsScheme& scheme,
                                   const Outcome& outcome);

/// Sampled overlap kernel: entry (p, q) estimated from `shots` post-selected
/// events per ordered pair by rotating the prepared state with the inverse
/// preparation of q and counting hits on the reference rail configuration.
/// Symmetrised by averaging the (p,q) and (q,p) estimates; unit diagonal.
KernelMatrix overlap_kernel(const AbsScheme& scheme, std::int64_t shots,
                            std::uint64_t seed);

/// Same physics, different data interpretation: composes `permutation` on
/// top of the existing outcome -> rule assignment.
AbsScheme reassign_outcomes(const AbsScheme& scheme,
                            const std::vector<int>& permutation);

std::vector<DensityMatrix> conditional_states_all(const AbsScheme& scheme);

/// Exact fidelity kernel of the ideal conditional states, labelled by
/// outcome pattern.
KernelMatrix scheme_fidelity_kernel(const AbsScheme& scheme);

}  // namespace absim
