#include <absim/scheme.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include <absim/errors.hpp>

namespace absim {

int AbsScheme::qudit_dim() const {
  return static_cast<int>(binomial(rail_count() + (n - r) - 1, n - r));
}

int AbsScheme::outcome_count() const {
  const int k = static_cast<int>(adaptive_modes.size());
  return static_cast<int>(allow_bunching ? binomial(k + r - 1, r)
                                         : binomial(k, r));
}

void validate_scheme(const AbsScheme& scheme) {
  if (scheme.m < 1) throw ValidationError("scheme: m must be >= 1");
  if (scheme.n < 0 || scheme.r < 0 || scheme.r > scheme.n)
    throw ValidationError("scheme: need 0 <= r <= n");
  if (static_cast<int>(scheme.input.size()) != scheme.m)
    throw ValidationError("scheme: input length != m");
  if (photon_count(scheme.input) != scheme.n)
    throw ValidationError("scheme: input photon count != n");
  std::set<int> seen;
  for (int mode : scheme.adaptive_modes) {
    if (mode < 0 || mode >= scheme.m)
      throw ValidationError("scheme: adaptive mode out of range");
    if (!seen.insert(mode).second)
      throw ValidationError("scheme: duplicate adaptive mode");
  }
  for (int mode : scheme.output_rails) {
    if (mode < 0 || mode >= scheme.m)
      throw ValidationError("scheme: output rail out of range");
    if (!seen.insert(mode).second)
      throw ValidationError("scheme: rails and adaptive modes must be disjoint");
  }
  if (scheme.output_rails.empty() && scheme.n > scheme.r)
    throw ValidationError("scheme: undetected photons but no output rails");
  if (scheme.base_mesh.m != scheme.m)
    throw ValidationError("scheme: base_mesh mode count != m");
  for (int slot : scheme.adaptive_slots)
    if (slot < 0 || slot >= static_cast<int>(scheme.base_mesh.cells.size()))
      throw ValidationError("scheme: adaptive slot index out of range");

  const int d = scheme.outcome_count();
  if (static_cast<int>(scheme.assignment.size()) != d)
    throw ValidationError("scheme: assignment size != outcome count");
  std::vector<bool> hit(static_cast<std::size_t>(d), false);
  for (int a : scheme.assignment) {
    if (a < 0 || a >= d || hit[static_cast<std::size_t>(a)])
      throw ValidationError("scheme: assignment is not a bijection");
    hit[static_cast<std::size_t>(a)] = true;
  }
}

std::vector<Outcome> enumerate_patterns(int k, int r, bool allow_bunching) {
  std::vector<Outcome> out;
  for (const FockState& state : enumerate_fock(k, r)) {
    if (!allow_bunching &&
        std::any_of(state.begin(), state.end(), [](int o) { return o > 1; }))
      continue;
    out.push_back(state);
  }
  return out;
}

std::vector<Outcome> enumerate_outcomes(const AbsScheme& scheme) {
  return enumerate_patterns(static_cast<int>(scheme.adaptive_modes.size()),
                            scheme.r, scheme.allow_bunching);
}

namespace {

// Positions of the detected photons for the pair-ramp families.
std::pair<int, int> detected_pair(const Outcome& outcome) {
  std::vector<int> positions;
  for (std::size_t i = 0; i < outcome.size(); ++i)
    for (int c = 0; c < outcome[i]; ++c)
      positions.push_back(static_cast<int>(i));
  if (positions.size() != 2)
    throw ValidationError("adaptive_angles: pair rule needs exactly 2 photons");
  return {positions[0], positions[1]};
}

double pair_ramp(int low, int high, int ramp_top) {
  double sum = static_cast<double>(low);
  for (int t = 1; t <= high; ++t) sum += static_cast<double>(ramp_top - t);
  return sum / 5.0;
}

}  // namespace

std::vector<std::pair<double, double>> adaptive_angles(const AdaptiveRule& rule,
                                                       const Outcome& outcome,
                                                       int slot_count) {
  switch (rule.family) {
    case RuleFamily::cascade_pi_half: {
      // theta for slot i is pi/2 times the photons detected at positions
      // before it, with `offset` always-empty leading positions.
      std::vector<int> padded(static_cast<std::size_t>(rule.cascade_offset), 0);
      padded.insert(padded.end(), outcome.begin(), outcome.end());
      if (static_cast<int>(padded.size()) < slot_count)
        throw ValidationError("adaptive_angles: cascade outcome too short");
      std::vector<std::pair<double, double>> angles;
      int cumulative = 0;
      for (int i = 1; i <= slot_count; ++i) {
        cumulative += padded[static_cast<std::size_t>(i - 1)];
        angles.emplace_back(reduce_angle(kPi / 2.0 * cumulative),
                            reduce_angle(rule.cascade_phi));
      }
      return angles;
    }
    case RuleFamily::gaussian_pair: {
      const auto [a, b] = detected_pair(outcome);
      if (a == b)
        throw ValidationError("adaptive_angles: bunched outcome not supported "
                              "by the pair rule");
      const double angle = reduce_angle(pair_ramp(a, b, 5));
      return {{angle, angle}};
    }
    case RuleFamily::gaussian_pair_bunched: {
      const auto [a, b] = detected_pair(outcome);
      const double angle =
          a == b ? reduce_angle((11.0 + a) / 5.0)
                 : reduce_angle(pair_ramp(a, b, 4));
      return {{angle, angle}};
    }
    case RuleFamily::explicit_table: {
      for (const AngleTableEntry& entry : rule.table)
        if (entry.outcome == outcome) {
          if (static_cast<int>(entry.angles.size()) != slot_count)
            throw ValidationError(
                "adaptive_angles: table entry has wrong slot count");
          return entry.angles;
        }
      throw ValidationError("adaptive_angles: table misses outcome " +
                            fock_to_string(outcome));
    }
  }
  throw ValidationError("adaptive_angles: unknown rule family");
}

namespace {

int outcome_index(const std::vector<Outcome>& outcomes, const Outcome& outcome) {
  const auto it = std::find(outcomes.begin(), outcomes.end(), outcome);
  if (it == outcomes.end())
    throw ValidationError("outcome " + fock_to_string(outcome) +
                          " is not admissible for this scheme");
  return static_cast<int>(it - outcomes.begin());
}

}  // namespace

CMatrix realized_unitary(const AbsScheme& scheme, const Outcome& outcome) {
  validate_scheme(scheme);
  const std::vector<Outcome> outcomes = enumerate_outcomes(scheme);
  const int idx = outcome_index(outcomes, outcome);
  const Outcome& rule_outcome =
      outcomes[static_cast<std::size_t>(
          scheme.assignment[static_cast<std::size_t>(idx)])];

  const int slot_count = static_cast<int>(scheme.adaptive_slots.size());
  std::vector<std::pair<double, double>> angles =
      adaptive_angles(scheme.rule, rule_outcome, slot_count);
  if (static_cast<int>(angles.size()) == 1 && slot_count > 1)
    angles.assign(static_cast<std::size_t>(slot_count), angles.front());
  if (static_cast<int>(angles.size()) != slot_count)
    throw ValidationError("realized_unitary: angle count != slot count");

  MeshProgram mesh = scheme.base_mesh;
  for (int i = 0; i < slot_count; ++i) {
    MziCell& cell =
        mesh.cells[static_cast<std::size_t>(scheme.adaptive_slots
                                                [static_cast<std::size_t>(i)])];
    cell.theta = angles[static_cast<std::size_t>(i)].first;
    cell.phi = angles[static_cast<std::size_t>(i)].second;
  }
  return mesh_to_unitary(mesh);
}

std::vector<FockState> rail_basis(const AbsScheme& scheme) {
  return enumerate_fock(scheme.rail_count(), scheme.n - scheme.r);
}

ConditionalState conditional_state(const AbsScheme& scheme,
                                   const Outcome& outcome) {
  const CMatrix u = realized_unitary(scheme, outcome);
  const std::vector<FockState> basis = rail_basis(scheme);

  ConditionalState result;
  result.amplitudes.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t b = 0; b < basis.size(); ++b) {
    FockState t(static_cast<std::size_t>(scheme.m), 0);
    for (std::size_t i = 0; i < scheme.adaptive_modes.size(); ++i)
      t[static_cast<std::size_t>(scheme.adaptive_modes[i])] = outcome[i];
    for (std::size_t j = 0; j < scheme.output_rails.size(); ++j)
      t[static_cast<std::size_t>(scheme.output_rails[j])] = basis[b][j];
    result.amplitudes[static_cast<Eigen::Index>(b)] =
        transition_amplitude(u, scheme.input, t);
  }

  result.probability = result.amplitudes.squaredNorm();
  if (result.probability < 1e-12)
    throw NumericalError("conditional_state: outcome " +
                         fock_to_string(outcome) +
                         " has no post-selection support");
  result.amplitudes /= std::sqrt(result.probability);
  result.state =
      DensityMatrix{result.amplitudes * result.amplitudes.adjoint()};
  return result;
}

std::vector<DensityMatrix> conditional_states_all(const AbsScheme& scheme) {
  std::vector<DensityMatrix> states;
  for (const Outcome& outcome : enumerate_outcomes(scheme))
    states.push_back(conditional_state(scheme, outcome).state);
  return states;
}

KernelMatrix scheme_fidelity_kernel(const AbsScheme& scheme) {
  KernelMatrix kernel = fidelity_kernel(conditional_states_all(scheme));
  kernel.labels.clear();
  for (const Outcome& outcome : enumerate_outcomes(scheme))
    kernel.labels.push_back(fock_to_string(outcome));
  return kernel;
}

namespace {

// Any unitary whose first row is psi^dag: detection of the first basis
// state after it inverts the preparation of psi.
CMatrix inverse_preparation(const CVector& psi) {
  const Eigen::Index d = psi.size();
  std::vector<CVector> rows;
  rows.push_back(psi.normalized());
  for (Eigen::Index e = 0; e < d && static_cast<Eigen::Index>(rows.size()) < d;
       ++e) {
    CVector candidate = CVector::Zero(d);
    candidate[e] = 1.0;
    for (const CVector& row : rows) candidate -= row.dot(candidate) * row;
    if (candidate.norm() > 1e-8) rows.push_back(candidate.normalized());
  }
  if (static_cast<Eigen::Index>(rows.size()) != d)
    throw NumericalError("inverse_preparation: basis completion failed");
  CMatrix w(d, d);
  for (Eigen::Index i = 0; i < d; ++i) w.row(i) = rows[i].adjoint();
  return w;
}

}  // namespace

KernelMatrix overlap_kernel(const AbsScheme& scheme, std::int64_t shots,
                            std::uint64_t seed) {
  if (shots < 1) throw ValidationError("overlap_kernel: need shots >= 1");
  const std::vector<Outcome> outcomes = enumerate_outcomes(scheme);
  const int count = static_cast<int>(outcomes.size());

  std::vector<CVector> states;
  states.reserve(static_cast<std::size_t>(count));
  for (int p = 0; p < count; ++p) {
    try {
      states.push_back(
          conditional_state(scheme, outcomes[static_cast<std::size_t>(p)])
              .amplitudes);
    } catch (const NumericalError&) {
      throw NumericalError("overlap_kernel: outcome " +
                           fock_to_string(outcomes[static_cast<std::size_t>(p)]) +
                           " has no post-selection support");
    }
  }

  KernelMatrix kernel;
  kernel.k = RMatrix::Identity(count, count);
  for (const Outcome& outcome : outcomes)
    kernel.labels.push_back(fock_to_string(outcome));

  std::uint64_t pair_counter = 0;
  for (int p = 0; p < count; ++p) {
    for (int q = 0; q < count; ++q) {
      if (p == q) continue;
      // Post-selected events with preparation p, analysed by the inverse
      // preparation of q; hits on the reference rail configuration
      // estimate the squared overlap.
      const CMatrix w = inverse_preparation(states[static_cast<std::size_t>(q)]);
      const CVector rotated = w * states[static_cast<std::size_t>(p)];
      std::vector<double> probs(static_cast<std::size_t>(rotated.size()));
      for (Eigen::Index i = 0; i < rotated.size(); ++i)
        probs[static_cast<std::size_t>(i)] = std::norm(rotated[i]);

      Rng rng(split_seed(seed, pair_counter++));
      const std::vector<std::int64_t> counts =
          sample_multinomial(probs, shots, rng);
      const double estimate =
          static_cast<double>(counts[0]) / static_cast<double>(shots);
      kernel.k(p, q) += estimate / 2.0;
      kernel.k(q, p) += estimate / 2.0;
    }
  }
  for (int p = 0; p < count; ++p) kernel.k(p, p) = 1.0;
  return kernel;
}

AbsScheme reassign_outcomes(const AbsScheme& scheme,
                            const std::vector<int>& permutation) {
  const int d = scheme.outcome_count();
  if (static_cast<int>(permutation.size()) != d)
    throw ValidationError("reassign_outcomes: permutation size != outcomes");
  std::vector<bool> hit(static_cast<std::size_t>(d), false);
  for (int p : permutation) {
    if (p < 0 || p >= d || hit[static_cast<std::size_t>(p)])
      throw ValidationError("reassign_outcomes: not a bijection");
    hit[static_cast<std::size_t>(p)] = true;
  }
  AbsScheme out = scheme;
  for (int i = 0; i < d; ++i)
    out.assignment[static_cast<std::size_t>(i)] =
        permutation[static_cast<std::size_t>(
            scheme.assignment[static_cast<std::size_t>(i)])];
  return out;
}

}  // namespace absim
