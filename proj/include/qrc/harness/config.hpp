#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrc/quadrature.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/task.hpp"

namespace qrc {

void to_json(nlohmann::json& j, const ReservoirSpec& spec);
void from_json(const nlohmann::json& j, ReservoirSpec& spec);

namespace harness {

struct ExperimentConfig {
  ReservoirSpec reservoir;
  // "sgn", or a path to a (u, f) samples CSV for a custom target.
  std::string task = "sgn";
  std::optional<std::filesystem::path> task_samples;
  InputDistribution inputs;
  double lambda = 1e-5;
  std::uint32_t shots = 1000;
  std::vector<std::size_t> n_grid{8, 16, 32, 64, 128, 256, 512};
  // Empty means 1..K_eff.
  std::vector<std::size_t> kl_grid;
  std::size_t repetitions = 50;
  QuadratureSpec quadrature;
  double gram_threshold = 1e-12;
  std::uint64_t seed = 20240601;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> spectrum_file;
  unsigned workers = 0;  // 0: hardware concurrency

  // Throws ValidationError for empty grids, R < 1, missing files and bad ranges.
  void validate() const;
  Target make_target() const;
};

// Keys: reservoir{L,J,hx_range,hz_range,hI_range,tau,seed}, task, task_samples,
// input_range, lambda, shots, n_grid, kl_grid, repetitions,
// quadrature{nodes,breakpoints,check_convergence,convergence_tolerance},
// gram_threshold, seed, output_dir, spectrum_file, workers.
// Relative paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Throws ValidationError naming the path if it cannot be read or parsed.
ExperimentConfig load_config(const std::filesystem::path& path);

// --out, else the config value, else $QRC_OUTPUT_DIR, else ./qrc-out.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& cli_out);

}  // namespace harness
}  // namespace qrc
