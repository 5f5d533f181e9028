#include <absim/types.hpp>

namespace absim {

double unitarity_defect(const CMatrix& u) {
  if (u.rows() != u.cols()) return 1.0;
  CMatrix gram = u.adjoint() * u;
  gram -= CMatrix::Identity(u.rows(), u.cols());
  return gram.cwiseAbs().maxCoeff();
}

bool is_unitary(const CMatrix& u, double tol) {
  return u.rows() == u.cols() && unitarity_defect(u) < tol;
}

bool is_hermitian(const CMatrix& h, double tol) {
  if (h.rows() != h.cols()) return false;
  return (h - h.adjoint()).cwiseAbs().maxCoeff() < tol;
}

}  // namespace absim
