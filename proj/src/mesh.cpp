#include <absim/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <string>

#include <absim/errors.hpp>

namespace absim {

double reduce_angle(double a) {
  const double two_pi = 2.0 * kPi;
  double r = std::fmod(a, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r = 0.0;  // fmod rounding at the boundary
  return r;
}

MeshProgram MeshProgram::identity(int m) {
  MeshProgram mesh;
  mesh.m = m;
  mesh.output_phases.assign(static_cast<std::size_t>(m), 0.0);
  return mesh;
}

Eigen::Matrix2cd mzi_transfer(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi))
    throw ValidationError("mzi_transfer: angles must be finite");
  const cplx ephi = std::polar(1.0, phi);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2cd t;
  t << ephi * c, cplx(-s, 0.0), ephi * s, cplx(c, 0.0);
  return t;
}

namespace {

void validate_mesh(const MeshProgram& mesh) {
  if (mesh.m < 1) throw ValidationError("mesh: mode count must be >= 1");
  if (!mesh.output_phases.empty() &&
      static_cast<int>(mesh.output_phases.size()) != mesh.m)
    throw ValidationError("mesh: output_phases size must equal m");
  // Within a layer every mode may be touched by at most one cell.
  std::vector<std::pair<int, int>> used;  // (layer, mode)
  for (const MziCell& cell : mesh.cells) {
    if (cell.top_mode < 0 || cell.top_mode > mesh.m - 2)
      throw ValidationError("mesh: cell top_mode " +
                            std::to_string(cell.top_mode) + " out of range");
    for (int mode : {cell.top_mode, cell.top_mode + 1}) {
      const auto key = std::make_pair(cell.layer, mode);
      if (std::find(used.begin(), used.end(), key) != used.end())
        throw ValidationError("mesh: overlapping cells in layer " +
                              std::to_string(cell.layer));
      used.push_back(key);
    }
  }
}

}  // namespace

CMatrix mesh_to_unitary(const MeshProgram& mesh) {
  validate_mesh(mesh);
  std::vector<const MziCell*> ordered;
  ordered.reserve(mesh.cells.size());
  for (const MziCell& cell : mesh.cells) ordered.push_back(&cell);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const MziCell* a, const MziCell* b) {
                     return a->layer < b->layer;
                   });

  CMatrix u = CMatrix::Identity(mesh.m, mesh.m);
  for (const MziCell* cell : ordered) {
    const Eigen::Matrix2cd t = mzi_transfer(cell->theta, cell->phi);
    u.block(cell->top_mode, 0, 2, mesh.m) =
        t * u.block(cell->top_mode, 0, 2, mesh.m);
  }
  if (!mesh.output_phases.empty()) {
    for (int i = 0; i < mesh.m; ++i)
      u.row(i) *= std::polar(1.0, mesh.output_phases[i]);
  }
  return u;
}

MeshProgram rectangular_mesh(int m, double theta, double phi) {
  if (m < 1) throw ValidationError("rectangular_mesh: need m >= 1");
  MeshProgram mesh = MeshProgram::identity(m);
  for (int layer = 0; layer < m; ++layer)
    for (int top = layer % 2; top <= m - 2; top += 2)
      mesh.cells.push_back({layer, top, reduce_angle(theta), reduce_angle(phi)});
  return mesh;
}

namespace {

struct Rotation {
  int top_mode = 0;
  double theta = 0.0;
  double phi = 0.0;
};

// Nulls (U T^dag)(row, col) by mixing columns (col, col+1).
Rotation null_by_columns(CMatrix& u, int row, int col) {
  const cplx a = u(row, col);
  const cplx b = u(row, col + 1);
  Rotation rot{col, 0.0, 0.0};
  if (std::abs(a) > 0.0) {
    rot.theta = std::atan2(std::abs(a), std::abs(b));
    rot.phi = std::arg(a) - std::arg(b);
  }
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  const cplx em = std::polar(1.0, -rot.phi);
  const CVector col_a = u.col(col);
  const CVector col_b = u.col(col + 1);
  u.col(col) = em * c * col_a - s * col_b;
  u.col(col + 1) = em * s * col_a + c * col_b;
  return rot;
}

// Nulls (T U)(row, col) by mixing rows (row-1, row).
Rotation null_by_rows(CMatrix& u, int row, int col) {
  const cplx a = u(row, col);
  const cplx b = u(row - 1, col);
  Rotation rot{row - 1, 0.0, 0.0};
  if (std::abs(a) > 0.0) {
    rot.theta = std::atan2(std::abs(a), std::abs(b));
    rot.phi = std::arg(-a) - std::arg(b);
  }
  const double c = std::cos(rot.theta);
  const double s = std::sin(rot.theta);
  const cplx ep = std::polar(1.0, rot.phi);
  const Eigen::RowVectorXcd row_top = u.row(row - 1);
  const Eigen::RowVectorXcd row_bot = u.row(row);
  u.row(row - 1) = ep * c * row_top - s * row_bot;
  u.row(row) = ep * s * row_top + c * row_bot;
  return rot;
}

}  // namespace

MeshProgram clements_decompose(const CMatrix& u_in) {
  if (u_in.rows() != u_in.cols())
    throw ValidationError("clements_decompose: matrix must be square");
  if (unitarity_defect(u_in) > 1e-8)
    throw ValidationError("clements_decompose: input is not unitary to 1e-8");

  const int m = static_cast<int>(u_in.rows());
  CMatrix u = u_in;
  std::vector<Rotation> right_ops;  // applied to columns, in order
  std::vector<Rotation> left_ops;   // applied to rows, in order

  // Null the below-diagonal entries anti-diagonal by anti-diagonal,
  // alternating column and row operations.
  for (int i = 1; i <= m - 1; ++i) {
    if (i % 2 == 1) {
      for (int j = 0; j <= i - 1; ++j)
        right_ops.push_back(null_by_columns(u, m - j - 1, i - j - 1));
    } else {
      for (int j = 1; j <= i; ++j)
        left_ops.push_back(null_by_rows(u, m + j - i - 1, j - 1));
    }
  }

  // The working matrix must now be diagonal.
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      if (r != c && std::abs(u(r, c)) > 1e-7)
        throw NumericalError("clements_decompose: nulling failed at (" +
                             std::to_string(r) + "," + std::to_string(c) + ")");

  std::vector<cplx> diag(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) diag[static_cast<std::size_t>(i)] = u(i, i);

  // Migrate each daggered row operation through the diagonal:
  // T^dag(theta, phi) D = D' T(theta, phi') with
  //   phi' = arg(-d1/d2), d1' = -e^{-i phi} d2, d2' = d2.
  std::vector<Rotation> migrated;  // in reverse application order
  migrated.reserve(left_ops.size());
  for (auto it = left_ops.rbegin(); it != left_ops.rend(); ++it) {
    const int t = it->top_mode;
    const cplx d1 = diag[static_cast<std::size_t>(t)];
    const cplx d2 = diag[static_cast<std::size_t>(t) + 1];
    Rotation out{t, it->theta, std::arg(-d1 / d2)};
    diag[static_cast<std::size_t>(t)] = -std::polar(1.0, -it->phi) * d2;
    migrated.push_back(out);
  }

  // Traversal order: the column operations as applied, then the migrated
  // row operations innermost-first. Layers are assigned as early as the
  // mode pair allows.
  MeshProgram mesh = MeshProgram::identity(m);
  std::vector<int> next_free(static_cast<std::size_t>(m), 0);
  auto emit = [&](const Rotation& rot) {
    const int layer = std::max(next_free[static_cast<std::size_t>(rot.top_mode)],
                               next_free[static_cast<std::size_t>(rot.top_mode) + 1]);
    mesh.cells.push_back({layer, rot.top_mode, reduce_angle(rot.theta),
                          reduce_angle(rot.phi)});
    next_free[static_cast<std::size_t>(rot.top_mode)] = layer + 1;
    next_free[static_cast<std::size_t>(rot.top_mode) + 1] = layer + 1;
  };
  for (const Rotation& rot : right_ops) emit(rot);
  for (const Rotation& rot : migrated) emit(rot);

  for (int i = 0; i < m; ++i)
    mesh.output_phases[static_cast<std::size_t>(i)] =
        reduce_angle(std::arg(diag[static_cast<std::size_t>(i)]));
  return mesh;
}

double amplitude_fidelity(const CMatrix& u_exp, const CMatrix& u_th) {
  if (u_exp.rows() != u_th.rows() || u_exp.cols() != u_th.cols() ||
      u_exp.rows() != u_exp.cols())
    throw ValidationError("amplitude_fidelity: dimension mismatch");
  const int n = static_cast<int>(u_exp.rows());
  // tr(|U_th^dag| |U_exp|) = sum_ij |U_th(i,j)| |U_exp(i,j)|.
  const double overlap =
      (u_th.cwiseAbs().cwiseProduct(u_exp.cwiseAbs())).sum();
  return overlap / static_cast<double>(n);
}

}  // namespace absim
