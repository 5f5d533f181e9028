#include <absim/presets.hpp>

#include <numeric>

#include <absim/linalg.hpp>

namespace absim {

namespace {

std::vector<int> identity_assignment(int d) {
  std::vector<int> assignment(static_cast<std::size_t>(d));
  std::iota(assignment.begin(), assignment.end(), 0);
  return assignment;
}

int cell_index(const MeshProgram& mesh, int layer, int top_mode) {
  for (std::size_t i = 0; i < mesh.cells.size(); ++i)
    if (mesh.cells[i].layer == layer && mesh.cells[i].top_mode == top_mode)
      return static_cast<int>(i);
  return -1;
}

// Fixed first stage followed by adaptive cells on the rail modes, one new
// layer per cell.
MeshProgram with_trailing_cells(MeshProgram mesh,
                                const std::vector<int>& top_modes,
                                std::vector<int>* slots) {
  int layer = 0;
  for (const MziCell& cell : mesh.cells) layer = std::max(layer, cell.layer + 1);
  for (int top : top_modes) {
    slots->push_back(static_cast<int>(mesh.cells.size()));
    mesh.cells.push_back({layer++, top, 0.0, 0.0});
  }
  return mesh;
}

CMatrix block_unitary(int m, const CMatrix& top, const CMatrix& bottom) {
  CMatrix u = CMatrix::Zero(m, m);
  u.topLeftCorner(top.rows(), top.cols()) = top;
  u.bottomRightCorner(bottom.rows(), bottom.cols()) = bottom;
  return u;
}

}  // namespace

AbsScheme platform_a() {
  AbsScheme scheme;
  scheme.id = "platformA";
  scheme.m = 6;
  scheme.n = 2;
  scheme.r = 1;
  scheme.input = {0, 0, 1, 0, 0, 1};
  scheme.adaptive_modes = {1, 2, 5};
  scheme.output_rails = {3, 4};
  scheme.allow_bunching = false;
  scheme.rule.family = RuleFamily::cascade_pi_half;
  // The first detector position is unreachable by construction, so the
  // cascade counts one always-empty position ahead of the outcome.
  scheme.rule.cascade_offset = 1;
  scheme.rule.cascade_phi = kPi / 4;
  scheme.base_mesh = rectangular_mesh(6, kPi / 4, kPi / 4);
  scheme.adaptive_slots = {cell_index(scheme.base_mesh, 2, 2),
                           cell_index(scheme.base_mesh, 3, 3),
                           cell_index(scheme.base_mesh, 4, 4)};
  scheme.assignment = identity_assignment(3);
  return scheme;
}

AbsScheme platform_b1() {
  AbsScheme scheme;
  scheme.id = "platformB1";
  scheme.m = 8;
  scheme.n = 3;
  scheme.r = 2;
  scheme.input = {0, 1, 0, 1, 0, 1, 0, 0};
  scheme.adaptive_modes = {0, 1, 2, 3, 4, 5};
  scheme.output_rails = {6, 7};
  scheme.allow_bunching = false;
  scheme.rule.family = RuleFamily::cascade_pi_half;
  scheme.rule.cascade_offset = 0;
  scheme.rule.cascade_phi = kPi / 4;
  scheme.base_mesh = rectangular_mesh(8, kPi / 4, kPi / 4);
  scheme.adaptive_slots = {cell_index(scheme.base_mesh, 2, 2),
                           cell_index(scheme.base_mesh, 3, 3),
                           cell_index(scheme.base_mesh, 4, 4),
                           cell_index(scheme.base_mesh, 5, 5),
                           cell_index(scheme.base_mesh, 6, 6)};
  scheme.assignment = identity_assignment(15);
  return scheme;
}

AbsScheme platform_b2() {
  AbsScheme scheme;
  scheme.id = "platformB2";
  scheme.m = 8;
  scheme.n = 3;
  scheme.r = 2;
  scheme.input = {1, 0, 0, 1, 0, 1, 0, 0};
  scheme.adaptive_modes = {2, 3, 4, 5, 6, 7};
  scheme.output_rails = {0, 1};
  scheme.allow_bunching = false;
  scheme.rule.family = RuleFamily::gaussian_pair;

  const CMatrix u0 = block_unitary(8, haar_unitary(2, 0xB2A),
                                   haar_unitary(6, 0xB2B));
  scheme.base_mesh =
      with_trailing_cells(clements_decompose(u0), {0}, &scheme.adaptive_slots);
  scheme.assignment = identity_assignment(15);
  return scheme;
}

AbsScheme platform_b3() {
  AbsScheme scheme;
  scheme.id = "platformB3";
  scheme.m = 8;
  scheme.n = 3;
  scheme.r = 2;
  scheme.input = {1, 0, 0, 0, 1, 0, 1, 0};
  scheme.adaptive_modes = {3, 4, 5, 6, 7};
  scheme.output_rails = {0, 1, 2};
  scheme.allow_bunching = true;
  scheme.rule.family = RuleFamily::gaussian_pair_bunched;

  const CMatrix u0 = block_unitary(8, haar_unitary(3, 0xB3A),
                                   haar_unitary(5, 0xB3B));
  scheme.base_mesh = with_trailing_cells(clements_decompose(u0), {0, 1},
                                         &scheme.adaptive_slots);
  scheme.assignment = identity_assignment(15);
  return scheme;
}

std::vector<AbsScheme> all_presets() {
  return {platform_a(), platform_b1(), platform_b2(), platform_b3()};
}

}  // namespace absim
