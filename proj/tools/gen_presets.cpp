// Regenerates the shipped configs/ preset files from the builders in the
// library, so the JSON artifacts never drift from the code.

#include <cmath>
#include <filesystem>
#include <iostream>

#include <nlohmann/json.hpp>

#include <absim/io.hpp>
#include <absim/presets.hpp>

namespace {

void emit(const std::filesystem::path& path, const nlohmann::json& j) {
  absim::write_file_atomic(path, j.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

nlohmann::json source_model(int n, double visibility, double g2) {
  absim::NoiseModel model;
  model.gram.s =
      absim::CMatrix::Constant(n, n, absim::cplx(std::sqrt(visibility), 0.0));
  for (int i = 0; i < n; ++i) model.gram.s(i, i) = 1.0;
  model.g2 = g2;
  model.eta = 1.0;
  return absim::noise_model_to_json(model);
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path out_dir = argc > 1 ? argv[1] : "configs";
  std::filesystem::create_directories(out_dir);
  for (const absim::AbsScheme& scheme : absim::all_presets()) {
    nlohmann::json j = absim::scheme_to_json(scheme);
    // Slot positions and mode roles are transcribed from device drawings;
    // they are editable and flagged as such.
    j["layout_provisional"] = true;
    emit(out_dir / (scheme.id + ".json"), j);
  }

  // Source models at the two platforms' measured figures of merit:
  // pairwise visibility and single-photon purity.
  emit(out_dir / "sourceA_noise.json", source_model(2, 0.998, 0.0));
  emit(out_dir / "sourceB_noise.json", source_model(3, 0.83, 0.02));

  emit(out_dir / "mesh8.json", {{"m", 8}});
  emit(out_dir / "classify1d_b2.json",
       {{"task", "1d"}, {"scheme", "platformB2.json"}});
  emit(out_dir / "classify1d_b3.json",
       {{"task", "1d"}, {"scheme", "platformB3.json"}});
  emit(out_dir / "classify2d_b2.json",
       {{"task", "2d"},
        {"scheme", "platformB2.json"},
        {"moons", {{"count", 200}, {"noise_sigma", 0.1}}}});
  emit(out_dir / "classify2d_b3.json",
       {{"task", "2d"},
        {"scheme", "platformB3.json"},
        {"moons", {{"count", 200}, {"noise_sigma", 0.1}}}});
  return 0;
}
