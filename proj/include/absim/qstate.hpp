#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <absim/types.hpp>

namespace absim {

/// d x d density matrix. Valid instances are Hermitian to 1e-10, unit trace
/// to 1e-10 and PSD down to -1e-10 on the smallest eigenvalue.
struct DensityMatrix {
  CMatrix rho;

  int dim() const { return static_cast<int>(rho.rows()); }
};

/// Throws when `rho` is not a physical density matrix within `tol`.
void validate_density(const CMatrix& rho, double tol = 1e-8);

double min_eigenvalue(const CMatrix& hermitian);

/// Real coordinates of a state in the traceless operator basis;
/// length d^2 - 1.
struct BlochVector {
  int d = 0;
  RVector components;
};

/// Traceless Hermitian operator basis with tr(s_a s_b) = 2 delta_ab.
/// d = 2: the three Pauli operators. d = 3: grouped ordering - three
/// symmetric off-diagonal, three antisymmetric, two diagonal.
std::vector<CMatrix> operator_basis(int d);

/// rho = I/d + v.sigma/2. Physicality is checked, not repaired: a vector
/// whose matrix dips below -1e-8 on the smallest eigenvalue is rejected.
DensityMatrix bloch_to_density(const BlochVector& v);

/// v_a = tr(rho sigma_a).
BlochVector density_to_bloch(const DensityMatrix& rho);

/// One projective measurement setting: the eigenbasis of one operator,
/// outcome index running over eigenvectors in descending eigenvalue order.
struct MeasurementSetting {
  std::vector<CMatrix> projectors;  // d rank-1 projectors
  std::vector<double> eigenvalues;  // descending
};

/// The settings measured for tomography in dimension d: one per basis
/// operator (3 for qubits, 8 for qutrits).
std::vector<MeasurementSetting> tomography_settings(int d);

struct TomographyCounts {
  int d = 0;
  std::int64_t shots_per_basis = 0;
  /// counts[setting][outcome]; kept as doubles so exact-probability
  /// (infinite statistics) pseudo-counts are representable.
  std::vector<std::vector<double>> counts;
};

TomographyCounts simulate_tomography(const DensityMatrix& rho,
                                     std::int64_t shots_per_basis,
                                     std::uint64_t seed);

struct MleReconstruction {
  DensityMatrix rho;
  std::vector<double> loglik_trace;  // one entry per accepted iteration
  int iterations = 0;
};

/// Iterative fixed-point ascent of the multinomial log-likelihood with a
/// damped fallback step, so the trace is non-decreasing by construction.
/// Stops when the gain drops below 1e-10 or after 1e4 iterations.
MleReconstruction mle_reconstruct(const TomographyCounts& counts);

/// (tr sqrt(sqrt(a) b sqrt(a)))^2; symmetric, equals the squared overlap on
/// pure inputs.
double uhlmann_fidelity(const DensityMatrix& a, const DensityMatrix& b);

/// D x D symmetric real kernel with unit diagonal and entries in [0, 1].
struct KernelMatrix {
  RMatrix k;
  std::vector<std::string> labels;  // one per row/column

  int dim() const { return static_cast<int>(k.rows()); }
};

void validate_kernel(const KernelMatrix& kernel, double tol = 1e-9);

KernelMatrix fidelity_kernel(const std::vector<DensityMatrix>& states);

}  // namespace absim
