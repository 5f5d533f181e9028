#include <absim/linalg.hpp>

#include <cmath>

#include <absim/rng.hpp>

namespace absim {

CMatrix matrix_sqrt_psd(const CMatrix& h) {
  if (h.rows() != h.cols())
    throw ValidationError("matrix_sqrt_psd: matrix must be square");
  if (!is_hermitian(h, 1e-12))
    throw ValidationError("matrix_sqrt_psd: input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw NumericalError("matrix_sqrt_psd: eigendecomposition failed");

  RVector eigs = solver.eigenvalues();
  for (int i = 0; i < eigs.size(); ++i) {
    if (eigs[i] < -1e-10)
      throw ValidationError("matrix_sqrt_psd: input is not PSD (eigenvalue " +
                            std::to_string(eigs[i]) + ")");
    if (eigs[i] < 0.0) eigs[i] = 0.0;
  }
  const CMatrix& v = solver.eigenvectors();
  CMatrix s = v * eigs.cwiseSqrt().asDiagonal() * v.adjoint();
  return (s + CMatrix(s.adjoint())) / 2.0;
}

CMatrix haar_unitary(int dim, std::uint64_t seed) {
  if (dim < 1) throw ValidationError("haar_unitary: dimension must be >= 1");

  Rng rng(seed);
  CMatrix ginibre(dim, dim);
  const double scale = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      ginibre(i, j) = cplx(rng.gaussian(), rng.gaussian()) * scale;

  Eigen::HouseholderQR<CMatrix> qr(ginibre);
  CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fold the R-diagonal phases into Q so the distribution is Haar.
  for (int j = 0; j < dim; ++j) {
    const cplx d = r(j, j);
    const double mag = std::abs(d);
    const cplx phase = mag > 0.0 ? d / mag : cplx(1.0, 0.0);
    q.col(j) *= phase;
  }
  return q;
}

}  // namespace absim
