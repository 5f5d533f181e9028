#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include <absim/fock.hpp>
#include <absim/mesh.hpp>
#include <absim/ml.hpp>
#include <absim/noise.hpp>
#include <absim/qstate.hpp>
#include <absim/scheme.hpp>

namespace absim {

nlohmann::json mesh_to_json(const MeshProgram& mesh);
MeshProgram mesh_from_json(const nlohmann::json& j);

nlohmann::json scheme_to_json(const AbsScheme& scheme);
AbsScheme scheme_from_json(const nlohmann::json& j);

nlohmann::json noise_model_to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const nlohmann::json& j);

nlohmann::json density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const nlohmann::json& j);

std::string distribution_to_csv(const OutputDistribution& dist);
OutputDistribution distribution_from_csv(const std::string& text);

std::string kernel_to_csv(const KernelMatrix& kernel);
KernelMatrix kernel_from_csv(const std::string& text);

std::string dataset1d_to_csv(const Dataset1D& data);
Dataset1D dataset1d_from_csv(const std::string& text);

std::string dataset2d_to_csv(const Dataset2D& data);
Dataset2D dataset2d_from_csv(const std::string& text);

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames, so failures never leave
/// a partial artifact behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace absim
