#include <doctest.h>

#include <nlohmann/json.hpp>

#include <absim/errors.hpp>
#include <absim/io.hpp>
#include <absim/linalg.hpp>
#include <absim/presets.hpp>

using namespace absim;

TEST_CASE("mesh JSON round trip is exact") {
  const MeshProgram mesh = clements_decompose(haar_unitary(5, 12));
  const nlohmann::json j = mesh_to_json(mesh);
  CHECK(j.contains("m"));
  CHECK(j.contains("cells"));
  CHECK(j.contains("output_phases"));
  CHECK(j["cells"][0].contains("layer"));
  CHECK(j["cells"][0].contains("top_mode"));
  CHECK(j["cells"][0].contains("theta"));
  CHECK(j["cells"][0].contains("phi"));

  // Through text: shortest-round-trip printing keeps doubles bit-exact.
  const MeshProgram back =
      mesh_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.cells.size() == mesh.cells.size());
  for (std::size_t i = 0; i < mesh.cells.size(); ++i) {
    CHECK(back.cells[i].layer == mesh.cells[i].layer);
    CHECK(back.cells[i].top_mode == mesh.cells[i].top_mode);
    CHECK(back.cells[i].theta == mesh.cells[i].theta);
    CHECK(back.cells[i].phi == mesh.cells[i].phi);
  }
  CHECK(back.output_phases == mesh.output_phases);
}

TEST_CASE("scheme JSON round trip preserves behaviour") {
  for (const AbsScheme& scheme : all_presets()) {
    const AbsScheme back =
        scheme_from_json(nlohmann::json::parse(scheme_to_json(scheme).dump()));
    CHECK(back.id == scheme.id);
    CHECK(back.input == scheme.input);
    CHECK(back.adaptive_slots == scheme.adaptive_slots);
    const Outcome outcome = enumerate_outcomes(scheme).front();
    CHECK((realized_unitary(back, outcome) - realized_unitary(scheme, outcome))
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }
}

TEST_CASE("scheme JSON validation names missing fields") {
  nlohmann::json j = scheme_to_json(platform_a());
  j.erase("input");
  CHECK_THROWS_WITH_AS(scheme_from_json(j),
                       "config: missing field \"input\"", ValidationError);
}

TEST_CASE("noise model JSON round trip") {
  NoiseModel model;
  model.gram.s = CMatrix::Ones(3, 3) * 0.9;
  for (int i = 0; i < 3; ++i) model.gram.s(i, i) = 1.0;
  model.g2 = 0.02;
  model.eta = 0.85;
  model.detector_eta = RVector::Constant(8, 0.7);

  const NoiseModel back = noise_model_from_json(
      nlohmann::json::parse(noise_model_to_json(model).dump()));
  CHECK(back.g2 == model.g2);
  CHECK(back.eta == model.eta);
  CHECK((back.gram.s - model.gram.s).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.detector_eta - model.detector_eta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("density JSON rejects unphysical input") {
  nlohmann::json j = {{"d", 2},
                      {"re", {{1.5, 0.0}, {0.0, -0.5}}},
                      {"im", {{0.0, 0.0}, {0.0, 0.0}}}};
  CHECK_THROWS_AS(density_from_json(j), ValidationError);
}

TEST_CASE("distribution CSV round trip") {
  OutputDistribution dist;
  dist.total_n = 2;
  dist.entries[{1, 0, 1}] = 0.25;
  dist.entries[{0, 2, 0}] = 0.75;
  const std::string csv = distribution_to_csv(dist);
  CHECK(csv.rfind("occupations,probability\n", 0) == 0);
  CHECK(csv.find("1|0|1") != std::string::npos);

  const OutputDistribution back = distribution_from_csv(csv);
  CHECK(back.entries.at({1, 0, 1}) == 0.25);
  CHECK(back.entries.at({0, 2, 0}) == 0.75);
}

TEST_CASE("kernel CSV round trip keeps labels and values") {
  KernelMatrix kernel;
  kernel.k = RMatrix::Identity(3, 3);
  kernel.k(0, 1) = kernel.k(1, 0) = 0.123456789012345;
  kernel.labels = {"1|0|0", "0|1|0", "0|0|1"};
  const KernelMatrix back = kernel_from_csv(kernel_to_csv(kernel));
  CHECK(back.labels == kernel.labels);
  CHECK((back.k - kernel.k).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset CSV round trips") {
  const Dataset1D line = default_line_dataset(15);
  const Dataset1D line_back = dataset1d_from_csv(dataset1d_to_csv(line));
  CHECK(line_back.xs == line.xs);
  CHECK(line_back.labels == line.labels);
  CHECK(line_back.outcome_index == line.outcome_index);

  const Dataset2D moons = make_moons(20, 0.1, 3);
  const Dataset2D moons_back = dataset2d_from_csv(dataset2d_to_csv(moons));
  CHECK(moons_back.labels == moons.labels);
  CHECK((moons_back.points - moons.points).cwiseAbs().maxCoeff() == 0.0);
}
