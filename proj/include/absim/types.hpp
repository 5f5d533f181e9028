#pragma once

#include <complex>

#include <Eigen/Dense>

namespace absim {

using cplx = std::complex<double>;

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Largest absolute entry of U^dag U - I; zero for an exact unitary.
double unitarity_defect(const CMatrix& u);

bool is_unitary(const CMatrix& u, double tol = 1e-10);
bool is_hermitian(const CMatrix& h, double tol = 1e-12);

}  // namespace absim
