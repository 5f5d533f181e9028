#include <doctest.h>

#include <absim/errors.hpp>
#include <absim/linalg.hpp>
#include <absim/rng.hpp>

#include "oracles.hpp"

using namespace absim;

namespace {

CMatrix random_complex(int n, std::uint64_t seed) {
  Rng rng(seed);
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(rng.gaussian(), rng.gaussian());
  return m;
}

}  // namespace

TEST_CASE("permanent of the empty matrix is one") {
  CHECK(permanent(CMatrix::Zero(0, 0)) == cplx(1.0, 0.0));
}

TEST_CASE("permanent of the identity is one") {
  CHECK(std::abs(permanent(CMatrix::Identity(3, 3)) - cplx(1.0, 0.0)) < 1e-14);
}

TEST_CASE("permanent rejects non-square input") {
  CHECK_THROWS_AS(permanent(CMatrix::Zero(2, 3)), ValidationError);
}

TEST_CASE("permanent matches the permutation-sum oracle") {
  for (int n = 1; n <= 6; ++n) {
    const CMatrix m = random_complex(n, 100 + static_cast<std::uint64_t>(n));
    const cplx fast = permanent(m);
    const cplx slow = oracle::naive_permanent(m);
    CHECK(std::abs(fast - slow) <= 1e-10 * std::max(1.0, std::abs(slow)));
  }
}

TEST_CASE("permanent is multilinear in rows") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix m = random_complex(5, 200 + trial);
    const cplx base = permanent(m);
    const cplx scale(rng.gaussian(), rng.gaussian());
    m.row(2) *= scale;
    CHECK(std::abs(permanent(m) - scale * base) <=
          1e-12 * std::max(1.0, std::abs(scale * base)));
  }
}

TEST_CASE("permanent is invariant under row and column permutations") {
  const CMatrix m = random_complex(5, 42);
  const cplx base = permanent(m);

  CMatrix rows = m;
  rows.row(0).swap(rows.row(3));
  CHECK(std::abs(permanent(rows) - base) <= 1e-12 * std::abs(base));

  CMatrix cols = m;
  cols.col(1).swap(cols.col(4));
  CHECK(std::abs(permanent(cols) - base) <= 1e-12 * std::abs(base));
}

TEST_CASE("matrix_sqrt_psd on identity and diagonal input") {
  const CMatrix id = CMatrix::Identity(2, 2);
  CHECK((matrix_sqrt_psd(id) - id).cwiseAbs().maxCoeff() < 1e-12);

  CMatrix diag = CMatrix::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 9.0;
  const CMatrix root = matrix_sqrt_psd(diag);
  CHECK(std::abs(root(0, 0) - cplx(2.0, 0.0)) < 1e-12);
  CHECK(std::abs(root(1, 1) - cplx(3.0, 0.0)) < 1e-12);
}

TEST_CASE("matrix_sqrt_psd squares back to the input") {
  const CMatrix g = random_complex(3, 11);
  const CMatrix h = g * g.adjoint();  // PSD
  const CMatrix s = matrix_sqrt_psd(h);
  CHECK(((s * s) - h).cwiseAbs().maxCoeff() < 1e-9);
  // Round trip: sqrt(S^2) = S for PSD S.
  CHECK((matrix_sqrt_psd(s * s) - s).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("matrix_sqrt_psd rejects bad inputs") {
  CMatrix not_hermitian = CMatrix::Zero(2, 2);
  not_hermitian(0, 1) = 1.0;
  CHECK_THROWS_AS(matrix_sqrt_psd(not_hermitian), ValidationError);

  CMatrix negative = CMatrix::Identity(2, 2);
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(matrix_sqrt_psd(negative), ValidationError);
}

TEST_CASE("haar_unitary basics") {
  const CMatrix u1 = haar_unitary(1, 5);
  CHECK(std::abs(std::abs(u1(0, 0)) - 1.0) < 1e-14);

  const CMatrix u8 = haar_unitary(8, 7);
  CHECK(unitarity_defect(u8) < 1e-12);

  // Columns orthonormal.
  const CMatrix gram = u8.adjoint() * u8;
  CHECK((gram - CMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(haar_unitary(0, 1), ValidationError);
}

TEST_CASE("haar_unitary is deterministic per seed") {
  const CMatrix a = haar_unitary(4, 123);
  const CMatrix b = haar_unitary(4, 123);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(a(i, j) == b(i, j));
  const CMatrix c = haar_unitary(4, 124);
  CHECK((a - c).cwiseAbs().maxCoeff() > 1e-3);
}
