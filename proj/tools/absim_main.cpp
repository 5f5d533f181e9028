#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <absim/errors.hpp>
#include <absim/io.hpp>
#include <absim/linalg.hpp>
#include <absim/ml.hpp>
#include <absim/noise.hpp>
#include <absim/presets.hpp>
#include <absim/qstate.hpp>
#include <absim/scheme.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config_path;
  std::string command;
  std::uint64_t seed = 1;
  std::int64_t shots = 0;  // 0: per-command default
  std::string method = "fidelity";
  std::string noise_path;
  std::string out_dir = "absim-out";
  int count = 50;
};

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

absim::AbsScheme load_scheme(const json& j, const fs::path& base_dir) {
  if (j.is_string()) {
    fs::path p = j.get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return absim::scheme_from_json(absim::load_json(p));
  }
  return absim::scheme_from_json(j);
}

std::vector<absim::DensityMatrix> scheme_states(const absim::AbsScheme& scheme,
                                                const Options& opt) {
  if (opt.noise_path.empty()) return absim::conditional_states_all(scheme);
  const absim::NoiseModel model =
      absim::noise_model_from_json(absim::load_json(opt.noise_path));
  return absim::noisy_conditional_states_all(scheme, model);
}

void write_report(const fs::path& out_dir, json report) {
  absim::write_file_atomic(out_dir / "report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << std::endl;
}

int run_mesh(const json& config, const Options& opt, const fs::path& out_dir) {
  Timer timer;
  absim::CMatrix u;
  if (config.contains("unitary")) {
    const json& uj = config.at("unitary");
    const int m = static_cast<int>(uj.at("re").size());
    u.resize(m, m);
    for (int i = 0; i < m; ++i)
      for (int j2 = 0; j2 < m; ++j2)
        u(i, j2) = absim::cplx(uj.at("re").at(i).at(j2).get<double>(),
                               uj.at("im").at(i).at(j2).get<double>());
  } else if (config.contains("m")) {
    u = absim::haar_unitary(config.at("m").get<int>(), opt.seed);
  } else {
    throw absim::ValidationError("mesh config needs \"m\" or \"unitary\"");
  }

  const absim::MeshProgram mesh = absim::clements_decompose(u);
  const absim::CMatrix rebuilt = absim::mesh_to_unitary(mesh);
  const double round_trip = (rebuilt - u).cwiseAbs().maxCoeff();

  absim::write_file_atomic(out_dir / "mesh.json",
                           absim::mesh_to_json(mesh).dump(2) + "\n");
  write_report(out_dir, {{"command", "mesh"},
                         {"seed", opt.seed},
                         {"m", u.rows()},
                         {"input_unitarity_defect", absim::unitarity_defect(u)},
                         {"round_trip_error", round_trip},
                         {"cells", mesh.cells.size()},
                         {"mesh_path", (out_dir / "mesh.json").string()},
                         {"wall_ms", timer.ms()}});
  return 0;
}

int run_simulate(const json& config, const Options& opt,
                 const fs::path& out_dir, const fs::path& base_dir) {
  Timer timer;
  const absim::AbsScheme scheme = load_scheme(config, base_dir);
  const std::vector<absim::Outcome> outcomes = absim::enumerate_outcomes(scheme);

  json probabilities = json::array();
  json fidelities = json::array();
  json state_paths = json::array();

  const bool with_noise = !opt.noise_path.empty();
  absim::NoiseModel model;
  if (with_noise)
    model = absim::noise_model_from_json(absim::load_json(opt.noise_path));

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const absim::ConditionalState ideal =
        absim::conditional_state(scheme, outcomes[i]);
    const std::string label = absim::fock_to_string(outcomes[i]);
    json entry = {{"outcome", label}, {"probability", ideal.probability}};

    // Raw photon-counting distribution under this outcome's circuit; the
    // post-selected statistics derive from it.
    const absim::CMatrix u = absim::realized_unitary(scheme, outcomes[i]);
    const absim::OutputDistribution dist =
        with_noise ? absim::noisy_output_distribution(u, scheme.input, model)
                   : absim::output_distribution(u, scheme.input);
    absim::write_file_atomic(
        out_dir / ("distribution_" + std::to_string(i) + ".csv"),
        absim::distribution_to_csv(dist));

    const fs::path state_path =
        out_dir / ("state_" + std::to_string(i) + ".json");
    json state_json = absim::density_to_json(ideal.state);
    state_json["outcome"] = label;

    if (with_noise) {
      const absim::NoisyConditional noisy =
          absim::noisy_conditional_state(scheme, outcomes[i], model);
      entry["noisy_probability"] = noisy.probability;
      const double f = absim::uhlmann_fidelity(ideal.state, noisy.state);
      entry["fidelity_vs_ideal"] = f;
      fidelities.push_back(f);
      state_json["noisy"] = absim::density_to_json(noisy.state);
    }
    absim::write_file_atomic(state_path, state_json.dump(2) + "\n");
    state_paths.push_back(state_path.string());
    probabilities.push_back(entry);
  }

  json report = {{"command", "simulate"},
                 {"scheme", scheme.id},
                 {"seed", opt.seed},
                 {"outcomes", probabilities},
                 {"state_paths", state_paths},
                 {"wall_ms", timer.ms()}};
  if (with_noise) report["fidelities_vs_ideal"] = fidelities;
  write_report(out_dir, report);
  return 0;
}

int run_kernel(const json& config, const Options& opt, const fs::path& out_dir,
               const fs::path& base_dir) {
  Timer timer;
  const absim::AbsScheme scheme = load_scheme(config, base_dir);

  absim::KernelMatrix kernel;
  if (opt.method == "fidelity") {
    kernel = absim::fidelity_kernel(scheme_states(scheme, opt));
    kernel.labels.clear();
    for (const absim::Outcome& outcome : absim::enumerate_outcomes(scheme))
      kernel.labels.push_back(absim::fock_to_string(outcome));
  } else if (opt.method == "overlap") {
    if (!opt.noise_path.empty())
      throw absim::ValidationError(
          "kernel: the overlap method runs on the ideal scheme only");
    const std::int64_t shots = opt.shots > 0 ? opt.shots : 1000000;
    kernel = absim::overlap_kernel(scheme, shots, opt.seed);
  } else {
    throw absim::ValidationError("kernel: unknown method " + opt.method);
  }
  absim::validate_kernel(kernel, 1e-9);

  const fs::path kernel_path = out_dir / "kernel.csv";
  absim::write_file_atomic(kernel_path, absim::kernel_to_csv(kernel));
  write_report(out_dir, {{"command", "kernel"},
                         {"scheme", scheme.id},
                         {"method", opt.method},
                         {"seed", opt.seed},
                         {"shots", opt.shots},
                         {"kernel_path", kernel_path.string()},
                         {"wall_ms", timer.ms()}});
  return 0;
}

int run_tomo(const json& config, const Options& opt, const fs::path& out_dir,
             const fs::path& base_dir) {
  Timer timer;
  const absim::AbsScheme scheme = load_scheme(config, base_dir);
  const std::int64_t shots = opt.shots > 0 ? opt.shots : 100000;
  const std::vector<absim::DensityMatrix> states = scheme_states(scheme, opt);
  const std::vector<absim::Outcome> outcomes = absim::enumerate_outcomes(scheme);

  json entries = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const absim::TomographyCounts counts = absim::simulate_tomography(
        states[i], shots, absim::split_seed(opt.seed, i));
    const absim::MleReconstruction recon = absim::mle_reconstruct(counts);
    const double f = absim::uhlmann_fidelity(recon.rho, states[i]);

    const fs::path recon_path =
        out_dir / ("recon_" + std::to_string(i) + ".json");
    json recon_json = absim::density_to_json(recon.rho);
    recon_json["outcome"] = absim::fock_to_string(outcomes[i]);
    absim::write_file_atomic(recon_path, recon_json.dump(2) + "\n");

    entries.push_back({{"outcome", absim::fock_to_string(outcomes[i])},
                       {"fidelity", f},
                       {"iterations", recon.iterations},
                       {"recon_path", recon_path.string()}});
  }
  write_report(out_dir, {{"command", "tomo"},
                         {"scheme", scheme.id},
                         {"seed", opt.seed},
                         {"shots_per_basis", shots},
                         {"reconstructions", entries},
                         {"wall_ms", timer.ms()}});
  return 0;
}

absim::KernelMatrix classify_kernel(const json& config, const Options& opt,
                                    const fs::path& base_dir) {
  if (config.contains("kernel_csv")) {
    fs::path p = config.at("kernel_csv").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    absim::KernelMatrix kernel = absim::kernel_from_csv(absim::read_file(p));
    absim::validate_kernel(kernel, 1e-6);
    return kernel;
  }
  if (config.contains("scheme")) {
    const absim::AbsScheme scheme = load_scheme(config.at("scheme"), base_dir);
    return absim::fidelity_kernel(scheme_states(scheme, opt));
  }
  throw absim::ValidationError("classify config needs \"kernel_csv\" or \"scheme\"");
}

int run_classify(const json& config, const Options& opt,
                 const fs::path& out_dir, const fs::path& base_dir) {
  Timer timer;
  const std::string task = config.value("task", std::string("1d"));
  const int splits = config.value("splits", 100);
  const double lambda = config.value("lambda", 50.0);
  const absim::KernelMatrix kernel = classify_kernel(config, opt, base_dir);

  absim::CrossValidation cv;
  json data_info;
  if (task == "1d") {
    absim::Dataset1D data;
    if (config.contains("dataset_csv")) {
      fs::path p = config.at("dataset_csv").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      data = absim::dataset1d_from_csv(absim::read_file(p));
    } else {
      data = absim::default_line_dataset(kernel.dim());
    }
    cv = absim::cross_validate(kernel.k, data.outcome_index, data.labels,
                               splits, 0.8, lambda, opt.seed);
    data_info = {{"points", data.xs.size()}};
  } else if (task == "2d") {
    absim::Dataset2D data;
    if (config.contains("dataset_csv")) {
      fs::path p = config.at("dataset_csv").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      data = absim::dataset2d_from_csv(absim::read_file(p));
    } else {
      const json moons = config.value("moons", json::object());
      data = absim::make_moons(moons.value("count", 200),
                               moons.value("noise_sigma", 0.1),
                               absim::split_seed(opt.seed, 0xD));
    }
    const int clusters = config.value("clusters", kernel.dim());
    cv = absim::classify_2d_pipeline(data, kernel.k, clusters, splits, lambda,
                                     opt.seed);
    data_info = {{"points", data.labels.size()}};
    const fs::path data_path = out_dir / "dataset.csv";
    absim::write_file_atomic(data_path, absim::dataset2d_to_csv(data));
    data_info["dataset_path"] = data_path.string();
  } else {
    throw absim::ValidationError("classify: task must be \"1d\" or \"2d\"");
  }

  write_report(out_dir, {{"command", "classify"},
                         {"task", task},
                         {"seed", opt.seed},
                         {"splits", splits},
                         {"lambda", lambda},
                         {"mean_accuracy", cv.mean_accuracy},
                         {"per_split", cv.per_split},
                         {"dataset", data_info},
                         {"wall_ms", timer.ms()}});
  return 0;
}

int run_permute_histogram(const json& config, const Options& opt,
                          const fs::path& out_dir, const fs::path& base_dir) {
  Timer timer;
  const absim::AbsScheme scheme = load_scheme(config, base_dir);
  const int d = scheme.outcome_count();

  absim::Dataset1D data;
  if (config.contains("dataset_csv")) {
    fs::path p = config.at("dataset_csv").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    data = absim::dataset1d_from_csv(absim::read_file(p));
  } else {
    data = absim::default_line_dataset(d);
  }

  std::vector<double> accuracies;
  std::string histogram = "kernel_index,accuracy\n";
  for (int i = 0; i < opt.count; ++i) {
    // Fisher-Yates permutation of the outcome -> rule map.
    absim::Rng rng(absim::split_seed(opt.seed, static_cast<std::uint64_t>(i)));
    std::vector<int> perm(static_cast<std::size_t>(d));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = perm.size(); k > 1; --k)
      std::swap(perm[k - 1], perm[static_cast<std::size_t>(rng.below(k))]);

    const absim::AbsScheme permuted = absim::reassign_outcomes(scheme, perm);
    const absim::KernelMatrix kernel =
        absim::fidelity_kernel(scheme_states(permuted, opt));
    absim::validate_kernel(kernel, 1e-9);
    const absim::CrossValidation cv =
        absim::cross_validate(kernel.k, data.outcome_index, data.labels, 100,
                              0.8, 50.0, absim::split_seed(opt.seed, 0x5000 + i));
    accuracies.push_back(cv.mean_accuracy);
    histogram += std::to_string(i) + "," + std::to_string(cv.mean_accuracy) + "\n";
  }

  const fs::path hist_path = out_dir / "histogram.csv";
  absim::write_file_atomic(hist_path, histogram);
  const double mean =
      std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
      static_cast<double>(accuracies.size());
  write_report(out_dir, {{"command", "permute-histogram"},
                         {"scheme", scheme.id},
                         {"seed", opt.seed},
                         {"count", opt.count},
                         {"mean_accuracy", mean},
                         {"accuracies", accuracies},
                         {"histogram_path", hist_path.string()},
                         {"wall_ms", timer.ms()}});
  return 0;
}

int run_noise_predict(const json& config, const Options& opt,
                      const fs::path& out_dir) {
  Timer timer;
  const absim::NoiseModel model = absim::noise_model_from_json(config);
  const int n = model.gram.n();

  std::string csv = "i,j,visibility\n";
  json pairs = json::array();
  for (int i = 0; i < n; ++i)
    for (int j2 = i + 1; j2 < n; ++j2) {
      const double v = absim::hom_visibility(model.gram.s(i, j2), 0.5);
      csv += std::to_string(i) + "," + std::to_string(j2) + "," +
             std::to_string(v) + "\n";
      pairs.push_back({{"i", i}, {"j", j2}, {"visibility", v}});
    }

  const fs::path path = out_dir / "hom_visibilities.csv";
  absim::write_file_atomic(path, csv);
  write_report(out_dir, {{"command", "noise-predict"},
                         {"seed", opt.seed},
                         {"pairs", pairs},
                         {"companion_branch_weight",
                          absim::noise_branch_weight(model.g2)},
                         {"visibilities_path", path.string()},
                         {"wall_ms", timer.ms()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  CLI::App app{"Adaptive photonic sampling simulator and analysis runner"};
  app.add_option("config", opt.config_path, "Path to the JSON config")
      ->required();
  app.add_option("command", opt.command, "One of: mesh simulate kernel tomo classify permute-histogram noise-predict")
      ->required()
      ->check(CLI::IsMember({"mesh", "simulate", "kernel", "tomo", "classify",
                             "permute-histogram", "noise-predict"}));
  app.add_option("--seed", opt.seed, "Master RNG seed");
  app.add_option("--shots", opt.shots, "Shots (per entry / per basis)");
  app.add_option("--method", opt.method, "Kernel method: fidelity | overlap")
      ->check(CLI::IsMember({"fidelity", "overlap"}));
  app.add_option("--noise", opt.noise_path, "Noise model JSON path");
  app.add_option("--out", opt.out_dir, "Output directory");
  app.add_option("--count", opt.count, "Reassigned kernel count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << std::endl;
    return 2;
  }

  try {
    const fs::path out_dir = opt.out_dir;
    fs::create_directories(out_dir);
    const json config = absim::load_json(opt.config_path);
    const fs::path base_dir = fs::path(opt.config_path).parent_path();

    if (opt.command == "mesh") return run_mesh(config, opt, out_dir);
    if (opt.command == "simulate")
      return run_simulate(config, opt, out_dir, base_dir);
    if (opt.command == "kernel")
      return run_kernel(config, opt, out_dir, base_dir);
    if (opt.command == "tomo") return run_tomo(config, opt, out_dir, base_dir);
    if (opt.command == "classify")
      return run_classify(config, opt, out_dir, base_dir);
    if (opt.command == "permute-histogram")
      return run_permute_histogram(config, opt, out_dir, base_dir);
    if (opt.command == "noise-predict")
      return run_noise_predict(config, opt, out_dir);
    std::cerr << "unknown command " << opt.command << std::endl;
    return 2;
  } catch (const absim::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << std::endl;
    return 3;
  } catch (const absim::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << std::endl;
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 4;
  }
}
