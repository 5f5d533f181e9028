#include <absim/noise.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <absim/errors.hpp>

namespace absim {

NoiseModel NoiseModel::ideal(int n_photons) {
  NoiseModel model;
  model.gram.s = CMatrix::Ones(n_photons, n_photons);
  return model;
}

void validate_noise_model(const NoiseModel& model) {
  const CMatrix& s = model.gram.s;
  if (s.rows() != s.cols() || s.rows() < 1)
    throw ValidationError("noise model: gram matrix must be square");
  if (!is_hermitian(s, 1e-10))
    throw ValidationError("noise model: gram matrix must be Hermitian");
  for (int i = 0; i < s.rows(); ++i)
    if (std::abs(s(i, i) - cplx(1.0, 0.0)) > 1e-8)
      throw ValidationError("noise model: gram diagonal must be one");
  if (model.g2 < 0.0 || model.g2 >= 1.0)
    throw ValidationError("noise model: g2 must lie in [0, 1)");
  if (!(model.eta > 0.0) || model.eta > 1.0)
    throw ValidationError("noise model: eta must lie in (0, 1]");
  for (int i = 0; i < model.detector_eta.size(); ++i)
    if (!(model.detector_eta[i] > 0.0) || model.detector_eta[i] > 1.0)
      throw ValidationError("noise model: detector efficiency outside (0, 1]");
}

CMatrix internal_decomposition(const GramMatrix& gram) {
  const CMatrix& s = gram.s;
  if (s.rows() != s.cols())
    throw ValidationError("internal_decomposition: gram must be square");
  if (!is_hermitian(s, 1e-10))
    throw ValidationError("internal_decomposition: gram must be Hermitian");

  const int n = static_cast<int>(s.rows());
  CMatrix l = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    double sub = 0.0;
    for (int k = 0; k < j; ++k) sub += std::norm(l(j, k));
    const double pivot = s(j, j).real() - sub;
    if (pivot < -1e-10)
      throw ValidationError("internal_decomposition: gram is not PSD");
    if (pivot <= 1e-12) continue;  // photon depends on the previous ones
    l(j, j) = std::sqrt(pivot);
    for (int i = j + 1; i < n; ++i) {
      cplx v = s(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * std::conj(l(j, k));
      l(i, j) = v / l(j, j);
    }
  }
  if (((l * l.adjoint()) - s).cwiseAbs().maxCoeff() > 1e-10)
    throw NumericalError("internal_decomposition: reconstruction exceeded 1e-10");
  return l;
}

double noise_branch_weight(double g2) {
  if (g2 < 0.0 || g2 >= 1.0)
    throw ValidationError("noise_branch_weight: g2 must lie in [0, 1)");
  if (g2 == 0.0) return 0.0;
  if (g2 > 0.5)
    throw ValidationError(
        "noise_branch_weight: a single companion branch saturates at g2 = 0.5");
  // Source emitting a distinguishable companion with probability w shows
  // autocorrelation 2w/(1+w)^2, increasing on [0, 1].
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-10) {
    const double mid = (lo + hi) / 2.0;
    const double value = 2.0 * mid / ((1.0 + mid) * (1.0 + mid));
    if (value < g2)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / 2.0;
}

double hom_visibility(cplx s12, double reflectivity) {
  if (std::abs(s12) > 1.0 + 1e-12)
    throw ValidationError("hom_visibility: |overlap| must be <= 1");
  if (reflectivity < 0.0 || reflectivity > 1.0)
    throw ValidationError("hom_visibility: reflectivity must lie in [0, 1]");
  const double r = reflectivity;
  const double t = 1.0 - r;
  const double distinguishable = r * r + t * t;
  if (distinguishable <= 0.0) return 0.0;
  return 2.0 * r * t * std::norm(s12) / distinguishable;
}

namespace {

struct LabeledPhoton {
  int mode = 0;
  std::vector<cplx> internal;  // amplitudes over the branch's label space
};

// Extended occupation vector, label-major: index = label * m + mode.
using ExtState = std::vector<int>;
using ExtAmplitudes = std::map<ExtState, cplx>;

ExtAmplitudes expand_input(const std::vector<LabeledPhoton>& photons, int m,
                           int q) {
  ExtAmplitudes terms;
  terms[ExtState(static_cast<std::size_t>(q * m), 0)] = cplx(1.0, 0.0);
  for (const LabeledPhoton& photon : photons) {
    ExtAmplitudes next;
    for (const auto& [state, amp] : terms) {
      for (int a = 0; a < q; ++a) {
        const cplx weight = photon.internal[static_cast<std::size_t>(a)];
        if (std::abs(weight) == 0.0) continue;
        ExtState grown = state;
        const std::size_t idx = static_cast<std::size_t>(a * m + photon.mode);
        grown[idx] += 1;
        const cplx contribution =
            amp * weight * std::sqrt(static_cast<double>(grown[idx]));
        next[grown] += contribution;
      }
    }
    terms = std::move(next);
  }
  double norm2 = 0.0;
  for (const auto& [state, amp] : terms) norm2 += std::norm(amp);
  if (norm2 <= 0.0)
    throw NumericalError("noise expansion produced an empty state");
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& [state, amp] : terms) amp *= inv;
  return terms;
}

// Photons never change label under the interferometer; each label sector
// evolves on the modes independently and amplitudes multiply.
ExtAmplitudes evolve_terms(const ExtAmplitudes& terms, const CMatrix& u,
                           int q) {
  const int m = static_cast<int>(u.rows());
  std::map<int, std::vector<FockState>> fock_cache;
  auto outputs_for = [&](int count) -> const std::vector<FockState>& {
    auto it = fock_cache.find(count);
    if (it == fock_cache.end())
      it = fock_cache.emplace(count, enumerate_fock(m, count)).first;
    return it->second;
  };

  ExtAmplitudes evolved;
  for (const auto& [state, amp] : terms) {
    std::vector<int> active;
    std::vector<FockState> slices(static_cast<std::size_t>(q));
    for (int a = 0; a < q; ++a) {
      FockState slice(state.begin() + a * m, state.begin() + (a + 1) * m);
      if (photon_count(slice) > 0) active.push_back(a);
      slices[static_cast<std::size_t>(a)] = std::move(slice);
    }

    ExtState out(static_cast<std::size_t>(q * m), 0);
    auto recurse = [&](auto&& self, std::size_t level, cplx acc) -> void {
      if (std::abs(acc) < 1e-300) return;
      if (level == active.size()) {
        evolved[out] += acc;
        return;
      }
      const int a = active[level];
      const FockState& slice = slices[static_cast<std::size_t>(a)];
      for (const FockState& target : outputs_for(photon_count(slice))) {
        const cplx sector = transition_amplitude(u, slice, target);
        if (std::abs(sector) == 0.0) continue;
        for (int mode = 0; mode < m; ++mode)
          out[static_cast<std::size_t>(a * m + mode)] =
              target[static_cast<std::size_t>(mode)];
        self(self, level + 1, acc * sector);
        for (int mode = 0; mode < m; ++mode)
          out[static_cast<std::size_t>(a * m + mode)] = 0;
      }
    };
    recurse(recurse, 0, amp);
  }
  return evolved;
}

FockState mode_marginal(const ExtState& state, int m, int q) {
  FockState marginal(static_cast<std::size_t>(m), 0);
  for (int a = 0; a < q; ++a)
    for (int mode = 0; mode < m; ++mode)
      marginal[static_cast<std::size_t>(mode)] +=
          state[static_cast<std::size_t>(a * m + mode)];
  return marginal;
}

// Per-photon detection thinning with the per-mode efficiencies.
void thin_and_accumulate(const std::map<FockState, double, FockOrder>& arrival,
                         const RVector& det, double weight,
                         std::map<FockState, double, FockOrder>& out) {
  if (det.size() == 0) {
    for (const auto& [u, p] : arrival) out[u] += weight * p;
    return;
  }
  for (const auto& [u, p] : arrival) {
    FockState v(u.size(), 0);
    auto recurse = [&](auto&& self, std::size_t mode, double factor) -> void {
      if (mode == u.size()) {
        out[v] += weight * p * factor;
        return;
      }
      const int arrived = u[mode];
      const double q = det[static_cast<Eigen::Index>(mode)];
      for (int kept = 0; kept <= arrived; ++kept) {
        v[mode] = kept;
        const double pmf = static_cast<double>(binomial(arrived, kept)) *
                           std::pow(q, kept) *
                           std::pow(1.0 - q, arrived - kept);
        self(self, mode + 1, factor * pmf);
      }
      v[mode] = 0;
    };
    recurse(recurse, 0, 1.0);
  }
}

struct NoiseBranches {
  CMatrix gram_root;     // rows: principal internal vectors
  double branch_weight;  // companion probability per photon
  std::vector<int> modes;  // one entry per input photon
};

NoiseBranches prepare_branches(const FockState& input, const NoiseModel& model) {
  validate_noise_model(model);
  const int n = photon_count(input);
  if (n > 4)
    throw ValidationError(
        "noise expansion supports at most 4 photons (capacity)");
  if (model.gram.n() != n)
    throw ValidationError("noise model: gram size must equal photon count");

  NoiseBranches prep;
  prep.gram_root = internal_decomposition(model.gram);
  prep.branch_weight = noise_branch_weight(model.g2);
  for (std::size_t mode = 0; mode < input.size(); ++mode)
    for (int c = 0; c < input[mode]; ++c)
      prep.modes.push_back(static_cast<int>(mode));
  return prep;
}

// Internal vectors for the photons in `survivors`, with companions from the
// replaced set carrying their own orthogonal labels.
std::vector<LabeledPhoton> branch_photons(const NoiseBranches& prep,
                                          std::uint32_t replaced,
                                          std::uint32_t survivors, int* q_out) {
  const int n = static_cast<int>(prep.modes.size());
  const int q = n + std::popcount(replaced);
  std::vector<LabeledPhoton> photons;
  int noise_slot = 0;
  for (int i = 0; i < n; ++i) {
    const bool is_replaced = (replaced >> i) & 1u;
    const int slot = is_replaced ? noise_slot++ : 0;
    if (!((survivors >> i) & 1u)) continue;
    LabeledPhoton photon;
    photon.mode = prep.modes[static_cast<std::size_t>(i)];
    photon.internal.assign(static_cast<std::size_t>(q), cplx(0.0, 0.0));
    if (is_replaced) {
      photon.internal[static_cast<std::size_t>(n + slot)] = 1.0;
    } else {
      for (int a = 0; a < n; ++a)
        photon.internal[static_cast<std::size_t>(a)] = prep.gram_root(i, a);
    }
    photons.push_back(std::move(photon));
  }
  *q_out = q;
  return photons;
}

}  // namespace

OutputDistribution noisy_output_distribution(const CMatrix& u,
                                             const FockState& input,
                                             const NoiseModel& model) {
  const int m = static_cast<int>(u.rows());
  if (static_cast<int>(input.size()) != m)
    throw ValidationError("noisy_output_distribution: input length != modes");
  if (model.detector_eta.size() != 0 && model.detector_eta.size() != m)
    throw ValidationError("noisy_output_distribution: detector vector size");
  const NoiseBranches prep = prepare_branches(input, model);
  const int n = static_cast<int>(prep.modes.size());
  const double w = prep.branch_weight;

  OutputDistribution dist;
  dist.total_n = n;
  dist.includes_loss_sectors =
      model.eta < 1.0 ||
      (model.detector_eta.size() != 0 && model.detector_eta.minCoeff() < 1.0);

  const std::uint32_t subsets = 1u << n;
  for (std::uint32_t replaced = 0; replaced < subsets; ++replaced) {
    const int n_replaced = std::popcount(replaced);
    const double w_replace = std::pow(w, n_replaced) *
                             std::pow(1.0 - w, n - n_replaced);
    if (w_replace <= 0.0) continue;
    for (std::uint32_t survivors = 0; survivors < subsets; ++survivors) {
      const int n_surv = std::popcount(survivors);
      const double w_loss = std::pow(model.eta, n_surv) *
                            std::pow(1.0 - model.eta, n - n_surv);
      if (w_loss <= 0.0) continue;

      std::map<FockState, double, FockOrder> arrival;
      if (n_surv == 0) {
        arrival[FockState(static_cast<std::size_t>(m), 0)] = 1.0;
      } else {
        int q = 0;
        const std::vector<LabeledPhoton> photons =
            branch_photons(prep, replaced, survivors, &q);
        const ExtAmplitudes evolved =
            evolve_terms(expand_input(photons, m, q), u, q);
        for (const auto& [state, amp] : evolved)
          arrival[mode_marginal(state, m, q)] += std::norm(amp);
      }
      thin_and_accumulate(arrival, model.detector_eta, w_replace * w_loss,
                          dist.entries);
    }
  }
  return dist;
}

NoisyConditional noisy_conditional_state(const AbsScheme& scheme,
                                         const Outcome& outcome,
                                         const NoiseModel& model) {
  validate_scheme(scheme);
  if (scheme.n - scheme.r != 1)
    throw ValidationError(
        "noisy_conditional_state supports a single undetected photon");
  const int m = scheme.m;
  if (model.detector_eta.size() != 0 && model.detector_eta.size() != m)
    throw ValidationError("noisy_conditional_state: detector vector size");
  const NoiseBranches prep = prepare_branches(scheme.input, model);
  const int n = static_cast<int>(prep.modes.size());
  const double w = prep.branch_weight;

  const CMatrix u = realized_unitary(scheme, outcome);
  const int d = scheme.rail_count();

  // Detector weights: the adaptive clicks contribute one fixed factor, the
  // rail click an amplitude factor per rail.
  double adaptive_factor = 1.0;
  RVector rail_amp_factor = RVector::Ones(d);
  if (model.detector_eta.size() != 0) {
    for (std::size_t i = 0; i < scheme.adaptive_modes.size(); ++i)
      adaptive_factor *=
          std::pow(model.detector_eta[scheme.adaptive_modes[i]], outcome[i]);
    for (int j = 0; j < d; ++j)
      rail_amp_factor[j] = std::sqrt(
          model.detector_eta[scheme.output_rails[static_cast<std::size_t>(j)]]);
  }

  CMatrix accumulated = CMatrix::Zero(d, d);
  const double survival = std::pow(model.eta, n);

  const std::uint32_t subsets = 1u << n;
  const std::uint32_t all = subsets - 1;
  for (std::uint32_t replaced = 0; replaced < subsets; ++replaced) {
    const int n_replaced = std::popcount(replaced);
    const double w_replace =
        std::pow(w, n_replaced) * std::pow(1.0 - w, n - n_replaced);
    if (w_replace <= 0.0) continue;

    int q = 0;
    const std::vector<LabeledPhoton> photons =
        branch_photons(prep, replaced, all, &q);
    const ExtAmplitudes evolved =
        evolve_terms(expand_input(photons, m, q), u, q);

    // Group amplitudes by (adaptive extended record, rail photon label):
    // coherence survives only across the rail position.
    std::map<std::pair<ExtState, int>, CVector> groups;
    for (const auto& [state, amp] : evolved) {
      const FockState marginal = mode_marginal(state, m, q);
      bool admissible = true;
      for (int mode = 0; mode < m && admissible; ++mode) {
        const bool is_adaptive =
            std::find(scheme.adaptive_modes.begin(), scheme.adaptive_modes.end(),
                      mode) != scheme.adaptive_modes.end();
        const bool is_rail =
            std::find(scheme.output_rails.begin(), scheme.output_rails.end(),
                      mode) != scheme.output_rails.end();
        if (!is_adaptive && !is_rail && marginal[static_cast<std::size_t>(mode)] != 0)
          admissible = false;
      }
      if (!admissible) continue;
      for (std::size_t i = 0; i < scheme.adaptive_modes.size(); ++i)
        if (marginal[static_cast<std::size_t>(scheme.adaptive_modes[i])] !=
            outcome[i]) {
          admissible = false;
          break;
        }
      if (!admissible) continue;

      int rail_j = -1, rail_label = -1, rail_total = 0;
      for (int j = 0; j < d; ++j) {
        const int mode = scheme.output_rails[static_cast<std::size_t>(j)];
        for (int a = 0; a < q; ++a) {
          const int occ = state[static_cast<std::size_t>(a * m + mode)];
          rail_total += occ;
          if (occ > 0) {
            rail_j = j;
            rail_label = a;
          }
        }
      }
      if (rail_total != 1) continue;

      ExtState record = state;
      record[static_cast<std::size_t>(
          rail_label * m +
          scheme.output_rails[static_cast<std::size_t>(rail_j)])] -= 1;
      auto [it, inserted] =
          groups.try_emplace({std::move(record), rail_label}, CVector::Zero(d));
      it->second[rail_j] += amp;
    }

    for (const auto& [key, vec] : groups) {
      const CVector weighted = rail_amp_factor.cast<cplx>().asDiagonal() * vec;
      accumulated +=
          (w_replace * survival * adaptive_factor) * weighted * weighted.adjoint();
    }
  }

  NoisyConditional result;
  result.probability = accumulated.trace().real();
  if (result.probability < 1e-12)
    throw NumericalError("noisy_conditional_state: outcome " +
                         fock_to_string(outcome) +
                         " has no post-selection support");
  CMatrix rho = accumulated / result.probability;
  result.state = DensityMatrix{(rho + CMatrix(rho.adjoint())) / 2.0};
  return result;
}

std::vector<DensityMatrix> noisy_conditional_states_all(
    const AbsScheme& scheme, const NoiseModel& model) {
  std::vector<DensityMatrix> states;
  for (const Outcome& outcome : enumerate_outcomes(scheme))
    states.push_back(noisy_conditional_state(scheme, outcome, model).state);
  return states;
}

}  // namespace absim
