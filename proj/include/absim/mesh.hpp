#pragma once

#include <vector>

#include <absim/types.hpp>

namespace absim {

/// One programmable interferometer cell: a variable beam splitter with
/// reflectivity angle theta and external phase phi acting on the mode pair
/// (top_mode, top_mode + 1). Angles are kept reduced to [0, 2pi).
struct MziCell {
  int layer = 0;
  int top_mode = 0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Layered interferometer program. Light traverses layers in increasing
/// index; the per-mode output phases are applied last. Cells within one
/// layer must act on disjoint mode pairs.
struct MeshProgram {
  int m = 0;
  std::vector<MziCell> cells;
  std::vector<double> output_phases;  // size m (empty means all zero)

  static MeshProgram identity(int m);
};

/// Maps an angle into [0, 2pi).
double reduce_angle(double a);

/// 2x2 transfer [[e^{i phi} cos t, -sin t], [e^{i phi} sin t, cos t]].
/// Crossed-port power is sin^2 t: theta = 0 is the bar state, pi/2 cross.
Eigen::Matrix2cd mzi_transfer(double theta, double phi);

CMatrix mesh_to_unitary(const MeshProgram& mesh);

/// Rectangular-mesh synthesis of an arbitrary unitary. The result has
/// m(m-1)/2 cells and reproduces `u` through mesh_to_unitary to 1e-8 in
/// max norm; residual diagonal phases are folded into output_phases.
MeshProgram clements_decompose(const CMatrix& u);

/// (1/N) tr(|U_th^dag| |U_exp|) with entry-wise moduli.
double amplitude_fidelity(const CMatrix& u_exp, const CMatrix& u_th);

/// The full rectangular grid on m modes with every cell set to the same
/// (theta, phi); m(m-1)/2 cells over m layers.
MeshProgram rectangular_mesh(int m, double theta, double phi);

}  // namespace absim
