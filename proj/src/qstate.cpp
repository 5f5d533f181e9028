#include <absim/qstate.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <absim/errors.hpp>
#include <absim/linalg.hpp>
#include <absim/rng.hpp>

namespace absim {

double min_eigenvalue(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian);
  return solver.eigenvalues().minCoeff();
}

void validate_density(const CMatrix& rho, double tol) {
  if (rho.rows() != rho.cols())
    throw ValidationError("density matrix must be square");
  if (!is_hermitian(rho, tol))
    throw ValidationError("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > tol)
    throw ValidationError("density matrix trace differs from one");
  if (min_eigenvalue((rho + CMatrix(rho.adjoint())) / 2.0) < -tol)
    throw ValidationError("density matrix is not PSD");
}

std::vector<CMatrix> operator_basis(int d) {
  if (d != 2 && d != 3)
    throw ValidationError("operator_basis: only d = 2 and d = 3 supported");
  std::vector<CMatrix> ops;
  if (d == 2) {
    CMatrix sx = CMatrix::Zero(2, 2), sy = CMatrix::Zero(2, 2),
            sz = CMatrix::Zero(2, 2);
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    sy(0, 1) = cplx(0.0, -1.0);
    sy(1, 0) = cplx(0.0, 1.0);
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;
    ops = {sx, sy, sz};
  } else {
    const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 2}, {1, 2}};
    for (auto [a, b] : pairs) {
      CMatrix sym = CMatrix::Zero(3, 3);
      sym(a, b) = 1.0;
      sym(b, a) = 1.0;
      ops.push_back(sym);
    }
    for (auto [a, b] : pairs) {
      CMatrix asym = CMatrix::Zero(3, 3);
      asym(a, b) = cplx(0.0, -1.0);
      asym(b, a) = cplx(0.0, 1.0);
      ops.push_back(asym);
    }
    CMatrix d1 = CMatrix::Zero(3, 3);
    d1(0, 0) = 1.0;
    d1(1, 1) = -1.0;
    ops.push_back(d1);
    CMatrix d2 = CMatrix::Zero(3, 3);
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    d2(0, 0) = inv_sqrt3;
    d2(1, 1) = inv_sqrt3;
    d2(2, 2) = -2.0 * inv_sqrt3;
    ops.push_back(d2);
  }
  return ops;
}

DensityMatrix bloch_to_density(const BlochVector& v) {
  const std::vector<CMatrix> ops = operator_basis(v.d);
  if (v.components.size() != static_cast<Eigen::Index>(ops.size()))
    throw ValidationError("bloch_to_density: component count mismatch");
  CMatrix rho = CMatrix::Identity(v.d, v.d) / static_cast<double>(v.d);
  for (std::size_t a = 0; a < ops.size(); ++a)
    rho += 0.5 * v.components[static_cast<Eigen::Index>(a)] * ops[a];
  const double min_eig = min_eigenvalue(rho);
  if (min_eig < -1e-8)
    throw ValidationError("bloch_to_density: vector is unphysical (eigenvalue " +
                          std::to_string(min_eig) + ")");
  return DensityMatrix{rho};
}

BlochVector density_to_bloch(const DensityMatrix& rho) {
  const int d = rho.dim();
  const std::vector<CMatrix> ops = operator_basis(d);
  BlochVector v;
  v.d = d;
  v.components.resize(static_cast<Eigen::Index>(ops.size()));
  for (std::size_t a = 0; a < ops.size(); ++a)
    v.components[static_cast<Eigen::Index>(a)] =
        (rho.rho * ops[a]).trace().real();
  return v;
}

std::vector<MeasurementSetting> tomography_settings(int d) {
  std::vector<MeasurementSetting> settings;
  for (const CMatrix& op : operator_basis(d)) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(op);
    MeasurementSetting setting;
    // Descending eigenvalue order so the +1 eigenvector comes first.
    for (int i = d - 1; i >= 0; --i) {
      const CVector vec = solver.eigenvectors().col(i);
      setting.projectors.push_back(vec * vec.adjoint());
      setting.eigenvalues.push_back(solver.eigenvalues()[i]);
    }
    settings.push_back(std::move(setting));
  }
  return settings;
}

TomographyCounts simulate_tomography(const DensityMatrix& rho,
                                     std::int64_t shots_per_basis,
                                     std::uint64_t seed) {
  if (shots_per_basis < 1)
    throw ValidationError("simulate_tomography: need shots >= 1");
  validate_density(rho.rho);
  const int d = rho.dim();
  const std::vector<MeasurementSetting> settings = tomography_settings(d);

  TomographyCounts counts;
  counts.d = d;
  counts.shots_per_basis = shots_per_basis;
  for (std::size_t a = 0; a < settings.size(); ++a) {
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(d));
    for (const CMatrix& proj : settings[a].projectors) {
      const double p = (rho.rho * proj).trace().real();
      probs.push_back(p > 0.0 ? p : 0.0);
    }
    Rng rng(split_seed(seed, a));
    const std::vector<std::int64_t> drawn =
        sample_multinomial(probs, shots_per_basis, rng);
    std::vector<double> row(drawn.size());
    for (std::size_t i = 0; i < drawn.size(); ++i)
      row[i] = static_cast<double>(drawn[i]);
    counts.counts.push_back(std::move(row));
  }
  return counts;
}

namespace {

double log_likelihood(const std::vector<std::vector<double>>& counts,
                      const std::vector<MeasurementSetting>& settings,
                      const CMatrix& rho) {
  double ll = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a)
    for (std::size_t i = 0; i < counts[a].size(); ++i) {
      const double c = counts[a][i];
      if (c <= 0.0) continue;
      double p = (rho * settings[a].projectors[i]).trace().real();
      if (p < 1e-300) p = 1e-300;
      ll += c * std::log(p);
    }
  return ll;
}

CMatrix likelihood_operator(const std::vector<std::vector<double>>& counts,
                            const std::vector<MeasurementSetting>& settings,
                            const CMatrix& rho) {
  CMatrix r = CMatrix::Zero(rho.rows(), rho.cols());
  for (std::size_t a = 0; a < counts.size(); ++a)
    for (std::size_t i = 0; i < counts[a].size(); ++i) {
      const double c = counts[a][i];
      if (c <= 0.0) continue;
      double p = (rho * settings[a].projectors[i]).trace().real();
      if (p < 1e-300) p = 1e-300;
      r += (c / p) * settings[a].projectors[i];
    }
  return r;
}

CMatrix normalised_state(const CMatrix& rho) {
  CMatrix h = (rho + CMatrix(rho.adjoint())) / 2.0;
  return h / h.trace().real();
}

}  // namespace

MleReconstruction mle_reconstruct(const TomographyCounts& counts) {
  const int d = counts.d;
  const std::vector<MeasurementSetting> settings = tomography_settings(d);
  if (counts.counts.size() != settings.size())
    throw ValidationError(
        "mle_reconstruct: counts do not cover the full setting list "
        "(not informationally complete)");
  double total = 0.0;
  for (const auto& row : counts.counts) {
    if (static_cast<int>(row.size()) != d)
      throw ValidationError("mle_reconstruct: outcome count mismatch");
    total += std::accumulate(row.begin(), row.end(), 0.0);
  }
  if (total <= 0.0) throw ValidationError("mle_reconstruct: empty counts");

  MleReconstruction result;
  CMatrix rho = CMatrix::Identity(d, d) / static_cast<double>(d);
  double ll = log_likelihood(counts.counts, settings, rho);
  result.loglik_trace.push_back(ll);

  const int max_iter = 10000;
  for (int iter = 0; iter < max_iter; ++iter) {
    const CMatrix r = likelihood_operator(counts.counts, settings, rho);
    CMatrix candidate = normalised_state(r * rho * r);
    double ll_new = log_likelihood(counts.counts, settings, candidate);

    if (ll_new < ll) {
      // Damped step; R/total at a fixed point is the identity, so small
      // epsilon always ascends unless we are already stationary.
      double eps = 0.5;
      bool improved = false;
      const CMatrix scaled = r / total;
      for (int halvings = 0; halvings < 60; ++halvings) {
        const CMatrix mix =
            (1.0 - eps) * CMatrix::Identity(d, d) + eps * scaled;
        candidate = normalised_state(mix * rho * mix.adjoint());
        ll_new = log_likelihood(counts.counts, settings, candidate);
        if (ll_new >= ll) {
          improved = true;
          break;
        }
        eps /= 2.0;
      }
      if (!improved) break;  // stationary within float resolution
    }

    rho = candidate;
    result.loglik_trace.push_back(ll_new);
    ++result.iterations;
    if (ll_new - ll < 1e-10) {
      ll = ll_new;
      break;
    }
    ll = ll_new;
  }

  result.rho = DensityMatrix{normalised_state(rho)};
  return result;
}

double uhlmann_fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim())
    throw ValidationError("uhlmann_fidelity: dimension mismatch");
  const CMatrix rho_a = (a.rho + CMatrix(a.rho.adjoint())) / 2.0;
  const CMatrix rho_b = (b.rho + CMatrix(b.rho.adjoint())) / 2.0;
  const CMatrix root = matrix_sqrt_psd(rho_a);
  CMatrix inner = root * rho_b * root;
  inner = (inner + CMatrix(inner.adjoint())) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(inner);
  // Eigenvalues below the solver's resolution are square-root amplified
  // noise on rank-deficient inputs; treat them as zero.
  const double floor = 1e-13 * std::max(solver.eigenvalues().maxCoeff(), 0.0);
  double trace_root = 0.0;
  for (int i = 0; i < solver.eigenvalues().size(); ++i) {
    const double lambda = solver.eigenvalues()[i];
    if (lambda > floor) trace_root += std::sqrt(lambda);
  }
  return trace_root * trace_root;
}

void validate_kernel(const KernelMatrix& kernel, double tol) {
  const RMatrix& k = kernel.k;
  if (k.rows() != k.cols()) throw ValidationError("kernel must be square");
  if (!kernel.labels.empty() &&
      static_cast<Eigen::Index>(kernel.labels.size()) != k.rows())
    throw ValidationError("kernel label count mismatch");
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    if (std::abs(k(i, i) - 1.0) > tol)
      throw ValidationError("kernel diagonal entry differs from one");
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
      if (std::abs(k(i, j) - k(j, i)) > tol)
        throw ValidationError("kernel is not symmetric");
      if (k(i, j) < -tol || k(i, j) > 1.0 + tol)
        throw ValidationError("kernel entry outside [0, 1]");
    }
  }
}

KernelMatrix fidelity_kernel(const std::vector<DensityMatrix>& states) {
  if (states.empty()) throw ValidationError("fidelity_kernel: no states");
  const int d = states.front().dim();
  for (const DensityMatrix& s : states)
    if (s.dim() != d)
      throw ValidationError("fidelity_kernel: mixed state dimensions");

  const int count = static_cast<int>(states.size());
  KernelMatrix kernel;
  kernel.k = RMatrix::Identity(count, count);
  for (int i = 0; i < count; ++i) {
    kernel.labels.push_back(std::to_string(i));
    for (int j = i + 1; j < count; ++j) {
      double f = uhlmann_fidelity(states[static_cast<std::size_t>(i)],
                                  states[static_cast<std::size_t>(j)]);
      f = std::clamp(f, 0.0, 1.0);
      kernel.k(i, j) = f;
      kernel.k(j, i) = f;
    }
  }
  return kernel;
}

}  // namespace absim
