#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include <absim/errors.hpp>
#include <absim/types.hpp>

namespace absim {

/// Permanent by Ryser's formula with Gray-code subset updates, O(2^n n).
/// Works on any dense Eigen expression; n = 0 returns 1 (empty product).
/// Intended range is n <= 16 (amplitude-sized submatrices).
template <typename Derived>
typename Derived::Scalar permanent(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols())
    throw ValidationError("permanent: matrix must be square");
  const int n = static_cast<int>(a.rows());
  if (n == 0) return Scalar(1);
  if (n > 16) throw ValidationError("permanent: dimension exceeds supported 16");

  std::vector<Scalar> sums(n, Scalar(0));
  Scalar total(0);
  std::uint64_t prev_gray = 0;
  const std::uint64_t subsets = std::uint64_t(1) << n;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t diff = gray ^ prev_gray;  // exactly one bit flips
    const int j = std::countr_zero(diff);
    if (gray & diff) {
      for (int i = 0; i < n; ++i) sums[i] += a(i, j);
    } else {
      for (int i = 0; i < n; ++i) sums[i] -= a(i, j);
    }
    prev_gray = gray;
    Scalar prod = sums[0];
    for (int i = 1; i < n; ++i) prod *= sums[i];
    // Sign (-1)^(n - |S|) of the inclusion-exclusion term for subset S.
    if ((n - std::popcount(gray)) & 1)
      total -= prod;
    else
      total += prod;
  }
  return total;
}

/// Hermitian PSD square root via eigendecomposition. Eigenvalues within
/// [-1e-10, 0) are clamped to zero; anything below rejects the input.
CMatrix matrix_sqrt_psd(const CMatrix& h);

/// Haar-distributed random unitary: QR of a complex Ginibre matrix with the
/// R-diagonal phases folded back into Q. Deterministic per seed.
CMatrix haar_unitary(int dim, std::uint64_t seed);

}  // namespace absim
