#include <absim/io.hpp>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include <absim/errors.hpp>

namespace absim {

using nlohmann::json;

namespace {

const json& require(const json& j, const std::string& field) {
  if (!j.contains(field))
    throw ValidationError("config: missing field \"" + field + "\"");
  return j.at(field);
}

std::vector<int> int_list(const json& j, const std::string& field) {
  const json& arr = require(j, field);
  if (!arr.is_array())
    throw ValidationError("config: field \"" + field + "\" must be an array");
  std::vector<int> out;
  for (const json& v : arr) {
    if (!v.is_number_integer())
      throw ValidationError("config: field \"" + field +
                            "\" must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

RMatrix real_matrix(const json& arr, const std::string& field) {
  if (!arr.is_array() || arr.empty())
    throw ValidationError("config: field \"" + field +
                          "\" must be a non-empty 2D array");
  const std::size_t rows = arr.size();
  const std::size_t cols = arr.at(0).size();
  RMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (arr.at(i).size() != cols)
      throw ValidationError("config: ragged rows in \"" + field + "\"");
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          arr.at(i).at(j).get<double>();
  }
  return m;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(line);
  while (std::getline(in, token, sep)) parts.push_back(token);
  return parts;
}

FockState parse_occupations(const std::string& text) {
  FockState s;
  for (const std::string& part : split(text, '|')) s.push_back(std::stoi(part));
  return s;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

json mesh_to_json(const MeshProgram& mesh) {
  json cells = json::array();
  for (const MziCell& cell : mesh.cells)
    cells.push_back({{"layer", cell.layer},
                     {"top_mode", cell.top_mode},
                     {"theta", cell.theta},
                     {"phi", cell.phi}});
  return {{"m", mesh.m},
          {"cells", cells},
          {"output_phases", mesh.output_phases}};
}

MeshProgram mesh_from_json(const json& j) {
  MeshProgram mesh;
  mesh.m = require(j, "m").get<int>();
  for (const json& c : require(j, "cells")) {
    MziCell cell;
    cell.layer = require(c, "layer").get<int>();
    cell.top_mode = require(c, "top_mode").get<int>();
    cell.theta = reduce_angle(require(c, "theta").get<double>());
    cell.phi = reduce_angle(require(c, "phi").get<double>());
    mesh.cells.push_back(cell);
  }
  mesh.output_phases =
      require(j, "output_phases").get<std::vector<double>>();
  return mesh;
}

namespace {

std::string family_name(RuleFamily family) {
  switch (family) {
    case RuleFamily::cascade_pi_half: return "cascade_pi_half";
    case RuleFamily::gaussian_pair: return "gaussian_b2";
    case RuleFamily::gaussian_pair_bunched: return "gaussian_b3";
    case RuleFamily::explicit_table: return "explicit_table";
  }
  return "unknown";
}

RuleFamily family_from_name(const std::string& name) {
  if (name == "cascade_pi_half") return RuleFamily::cascade_pi_half;
  if (name == "gaussian_b2") return RuleFamily::gaussian_pair;
  if (name == "gaussian_b3") return RuleFamily::gaussian_pair_bunched;
  if (name == "explicit_table") return RuleFamily::explicit_table;
  throw ValidationError("config: unknown rule family \"" + name + "\"");
}

}  // namespace

json scheme_to_json(const AbsScheme& scheme) {
  json rule = {{"family", family_name(scheme.rule.family)},
               {"parameters",
                {{"offset", scheme.rule.cascade_offset},
                 {"phi", scheme.rule.cascade_phi}}}};
  if (scheme.rule.family == RuleFamily::explicit_table) {
    json table = json::array();
    for (const AngleTableEntry& entry : scheme.rule.table) {
      json angles = json::array();
      for (const auto& [theta, phi] : entry.angles)
        angles.push_back({theta, phi});
      table.push_back({{"outcome", entry.outcome}, {"angles", angles}});
    }
    rule["table"] = table;
  }
  return {{"id", scheme.id},
          {"m", scheme.m},
          {"n", scheme.n},
          {"input", scheme.input},
          {"adaptive_modes", scheme.adaptive_modes},
          {"r", scheme.r},
          {"output_rails", scheme.output_rails},
          {"allow_bunching", scheme.allow_bunching},
          {"rule", rule},
          {"base_mesh", mesh_to_json(scheme.base_mesh)},
          {"adaptive_slots", scheme.adaptive_slots},
          {"assignment", scheme.assignment}};
}

AbsScheme scheme_from_json(const json& j) {
  AbsScheme scheme;
  scheme.id = j.value("id", std::string("scheme"));
  scheme.m = require(j, "m").get<int>();
  scheme.n = require(j, "n").get<int>();
  scheme.r = require(j, "r").get<int>();
  scheme.input = int_list(j, "input");
  scheme.adaptive_modes = int_list(j, "adaptive_modes");
  scheme.output_rails = int_list(j, "output_rails");
  scheme.allow_bunching = require(j, "allow_bunching").get<bool>();

  const json& rule = require(j, "rule");
  scheme.rule.family = family_from_name(require(rule, "family").get<std::string>());
  if (rule.contains("parameters")) {
    const json& params = rule.at("parameters");
    scheme.rule.cascade_offset = params.value("offset", 0);
    scheme.rule.cascade_phi = params.value("phi", kPi / 4);
  }
  if (scheme.rule.family == RuleFamily::explicit_table) {
    for (const json& entry : require(rule, "table")) {
      AngleTableEntry e;
      for (const json& occ : require(entry, "outcome"))
        e.outcome.push_back(occ.get<int>());
      for (const json& pair : require(entry, "angles")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ValidationError("config: table angles must be [theta, phi]");
        e.angles.emplace_back(pair.at(0).get<double>(),
                              pair.at(1).get<double>());
      }
      scheme.rule.table.push_back(std::move(e));
    }
  }

  scheme.base_mesh = mesh_from_json(require(j, "base_mesh"));
  scheme.adaptive_slots = int_list(j, "adaptive_slots");
  scheme.assignment = int_list(j, "assignment");
  validate_scheme(scheme);
  return scheme;
}

json noise_model_to_json(const NoiseModel& model) {
  json gram = json::array();
  for (int i = 0; i < model.gram.s.rows(); ++i) {
    json row = json::array();
    for (int j2 = 0; j2 < model.gram.s.cols(); ++j2)
      row.push_back(model.gram.s(i, j2).real());
    gram.push_back(row);
  }
  json detector = json::array();
  for (int i = 0; i < model.detector_eta.size(); ++i)
    detector.push_back(model.detector_eta[i]);
  return {{"gram", gram},
          {"g2", model.g2},
          {"eta", model.eta},
          {"detector_eta", detector}};
}

NoiseModel noise_model_from_json(const json& j) {
  NoiseModel model;
  const RMatrix gram = real_matrix(require(j, "gram"), "gram");
  model.gram.s = gram.cast<cplx>();
  model.g2 = require(j, "g2").get<double>();
  model.eta = require(j, "eta").get<double>();
  const json& detector = require(j, "detector_eta");
  model.detector_eta.resize(static_cast<Eigen::Index>(detector.size()));
  for (std::size_t i = 0; i < detector.size(); ++i)
    model.detector_eta[static_cast<Eigen::Index>(i)] =
        detector.at(i).get<double>();
  validate_noise_model(model);
  return model;
}

json density_to_json(const DensityMatrix& rho) {
  const int d = rho.dim();
  json re = json::array(), im = json::array();
  for (int i = 0; i < d; ++i) {
    json re_row = json::array(), im_row = json::array();
    for (int j2 = 0; j2 < d; ++j2) {
      re_row.push_back(rho.rho(i, j2).real());
      im_row.push_back(rho.rho(i, j2).imag());
    }
    re.push_back(re_row);
    im.push_back(im_row);
  }
  return {{"d", d}, {"re", re}, {"im", im}};
}

DensityMatrix density_from_json(const json& j) {
  const int d = require(j, "d").get<int>();
  const RMatrix re = real_matrix(require(j, "re"), "re");
  const RMatrix im = real_matrix(require(j, "im"), "im");
  if (re.rows() != d || re.cols() != d || im.rows() != d || im.cols() != d)
    throw ValidationError("density: re/im shape must be d x d");
  DensityMatrix rho;
  rho.rho = re.cast<cplx>() + cplx(0.0, 1.0) * im.cast<cplx>();
  validate_density(rho.rho);
  return rho;
}

std::string distribution_to_csv(const OutputDistribution& dist) {
  std::ostringstream out;
  out << "occupations,probability\n";
  for (const auto& [state, p] : dist.entries)
    out << fock_to_string(state) << ',' << format_double(p) << '\n';
  return out.str();
}

OutputDistribution distribution_from_csv(const std::string& text) {
  const std::vector<std::string> lines = csv_lines(text);
  if (lines.empty() || lines[0] != "occupations,probability")
    throw ValidationError("distribution csv: bad header");
  OutputDistribution dist;
  int max_n = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> parts = split(lines[i], ',');
    if (parts.size() != 2)
      throw ValidationError("distribution csv: bad row " + lines[i]);
    const FockState s = parse_occupations(parts[0]);
    dist.entries[s] = std::stod(parts[1]);
    max_n = std::max(max_n, photon_count(s));
  }
  dist.total_n = max_n;
  return dist;
}

std::string kernel_to_csv(const KernelMatrix& kernel) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kernel.labels.size(); ++i) {
    if (i) out << ',';
    out << kernel.labels[i];
  }
  out << '\n';
  for (Eigen::Index i = 0; i < kernel.k.rows(); ++i) {
    for (Eigen::Index j = 0; j < kernel.k.cols(); ++j) {
      if (j) out << ',';
      out << format_double(kernel.k(i, j));
    }
    out << '\n';
  }
  return out.str();
}

KernelMatrix kernel_from_csv(const std::string& text) {
  const std::vector<std::string> lines = csv_lines(text);
  if (lines.size() < 2) throw ValidationError("kernel csv: too short");
  KernelMatrix kernel;
  kernel.labels = split(lines[0], ',');
  const int d = static_cast<int>(kernel.labels.size());
  if (static_cast<int>(lines.size()) != d + 1)
    throw ValidationError("kernel csv: row count != label count");
  kernel.k.resize(d, d);
  for (int i = 0; i < d; ++i) {
    const std::vector<std::string> parts = split(lines[static_cast<std::size_t>(i) + 1], ',');
    if (static_cast<int>(parts.size()) != d)
      throw ValidationError("kernel csv: ragged row");
    for (int j = 0; j < d; ++j)
      kernel.k(i, j) = std::stod(parts[static_cast<std::size_t>(j)]);
  }
  return kernel;
}

std::string dataset1d_to_csv(const Dataset1D& data) {
  std::ostringstream out;
  out << "x,y,label,outcome\n";
  for (std::size_t i = 0; i < data.xs.size(); ++i)
    out << format_double(data.xs[i]) << ",0," << data.labels[i] << ','
        << data.outcome_index[i] << '\n';
  return out.str();
}

Dataset1D dataset1d_from_csv(const std::string& text) {
  const std::vector<std::string> lines = csv_lines(text);
  if (lines.empty() || lines[0] != "x,y,label,outcome")
    throw ValidationError("1d dataset csv: bad header");
  Dataset1D data;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> parts = split(lines[i], ',');
    if (parts.size() != 4)
      throw ValidationError("1d dataset csv: bad row " + lines[i]);
    data.xs.push_back(std::stod(parts[0]));
    data.labels.push_back(std::stoi(parts[2]));
    data.outcome_index.push_back(std::stoi(parts[3]));
  }
  return data;
}

std::string dataset2d_to_csv(const Dataset2D& data) {
  std::ostringstream out;
  out << "x,y,label\n";
  for (Eigen::Index i = 0; i < data.points.rows(); ++i)
    out << format_double(data.points(i, 0)) << ','
        << format_double(data.points(i, 1)) << ','
        << data.labels[static_cast<std::size_t>(i)] << '\n';
  return out.str();
}

Dataset2D dataset2d_from_csv(const std::string& text) {
  const std::vector<std::string> lines = csv_lines(text);
  if (lines.empty() || lines[0] != "x,y,label")
    throw ValidationError("2d dataset csv: bad header");
  Dataset2D data;
  data.points.resize(static_cast<Eigen::Index>(lines.size()) - 1, 2);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> parts = split(lines[i], ',');
    if (parts.size() != 3)
      throw ValidationError("2d dataset csv: bad row " + lines[i]);
    data.points(static_cast<Eigen::Index>(i) - 1, 0) = std::stod(parts[0]);
    data.points(static_cast<Eigen::Index>(i) - 1, 1) = std::stod(parts[1]);
    data.labels.push_back(std::stoi(parts[2]));
  }
  return data;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write file " + tmp.string());
    out << content;
    if (!out.good()) throw NumericalError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json load_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& err) {
    throw ValidationError("invalid JSON in " + path.string() + ": " +
                          err.what());
  }
}

}  // namespace absim
