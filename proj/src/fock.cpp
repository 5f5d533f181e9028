#include <absim/fock.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <absim/errors.hpp>
#include <absim/linalg.hpp>

namespace absim {

int photon_count(const FockState& s) {
  int n = 0;
  for (int occ : s) n += occ;
  return n;
}

std::string fock_to_string(const FockState& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += '|';
    out += std::to_string(s[i]);
  }
  return out;
}

bool FockOrder::operator()(const FockState& a, const FockState& b) const {
  // Photon-position order: higher occupation of earlier modes first.
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

std::int64_t binomial(int n, int k) {
  if (k < 0) return 0;
  if (k == 0) return 1;  // also covers the empty C(-1, 0) convention
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

namespace {

void enumerate_rec(int m, int mode, int remaining, FockState& current,
                   std::vector<FockState>& out) {
  if (mode == m - 1) {
    current[static_cast<std::size_t>(mode)] = remaining;
    out.push_back(current);
    return;
  }
  for (int c = remaining; c >= 0; --c) {
    current[static_cast<std::size_t>(mode)] = c;
    enumerate_rec(m, mode + 1, remaining - c, current, out);
  }
}

double occupation_factorial(const FockState& s) {
  double f = 1.0;
  for (int occ : s)
    for (int i = 2; i <= occ; ++i) f *= static_cast<double>(i);
  return f;
}

}  // namespace

std::vector<FockState> enumerate_fock(int m, int n) {
  if (m < 0) throw ValidationError("enumerate_fock: need m >= 0");
  if (n < 0) throw ValidationError("enumerate_fock: need n >= 0");
  if (m == 0) {
    if (n == 0) return {FockState{}};
    return {};
  }
  std::vector<FockState> out;
  out.reserve(static_cast<std::size_t>(binomial(m + n - 1, n)));
  FockState current(static_cast<std::size_t>(m), 0);
  enumerate_rec(m, 0, n, current, out);
  return out;
}

cplx transition_amplitude(const CMatrix& u, const FockState& s,
                          const FockState& t) {
  const int m = static_cast<int>(u.rows());
  if (u.cols() != m) throw ValidationError("transition_amplitude: U not square");
  if (static_cast<int>(s.size()) != m || static_cast<int>(t.size()) != m)
    throw ValidationError("transition_amplitude: state length != mode count");
  const int n = photon_count(s);
  if (photon_count(t) != n)
    throw ValidationError("transition_amplitude: photon number not conserved");
  if (n == 0) return cplx(1.0, 0.0);

  std::vector<int> cols, rows;
  cols.reserve(static_cast<std::size_t>(n));
  rows.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < s[static_cast<std::size_t>(j)]; ++c) cols.push_back(j);
  for (int i = 0; i < m; ++i)
    for (int c = 0; c < t[static_cast<std::size_t>(i)]; ++c) rows.push_back(i);

  CMatrix sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sub(i, j) = u(rows[static_cast<std::size_t>(i)],
                    cols[static_cast<std::size_t>(j)]);

  const double norm =
      std::sqrt(occupation_factorial(s) * occupation_factorial(t));
  return permanent(sub) / norm;
}

double OutputDistribution::total() const {
  double sum = 0.0;
  for (const auto& [state, p] : entries) sum += p;
  return sum;
}

OutputDistribution output_distribution(const CMatrix& u, const FockState& s) {
  const int m = static_cast<int>(u.rows());
  OutputDistribution dist;
  dist.total_n = photon_count(s);
  for (const FockState& t : enumerate_fock(m, dist.total_n)) {
    const cplx amp = transition_amplitude(u, s, t);
    dist.entries[t] = std::norm(amp);
  }
  return dist;
}

std::map<FockState, std::int64_t, FockOrder> sample_outputs(
    const CMatrix& u, const FockState& s, std::int64_t shots,
    std::uint64_t seed) {
  if (shots < 1) throw ValidationError("sample_outputs: need shots >= 1");
  const OutputDistribution dist = output_distribution(u, s);

  std::vector<const FockState*> states;
  std::vector<double> probs;
  states.reserve(dist.entries.size());
  probs.reserve(dist.entries.size());
  for (const auto& [state, p] : dist.entries) {
    states.push_back(&state);
    probs.push_back(p);
  }

  Rng rng(seed);
  const std::vector<std::int64_t> counts =
      sample_multinomial(probs, shots, rng);

  std::map<FockState, std::int64_t, FockOrder> out;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) out[*states[i]] = counts[i];
  return out;
}

}  // namespace absim
