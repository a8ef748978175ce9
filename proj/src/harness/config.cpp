#include "qrc/harness/config.hpp"

#include <cstdlib>
#include <fstream>

#include "qrc/error.hpp"

namespace qrc {

namespace {

Interval interval_from(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw ValidationError(std::string("reservoir.") + key + " must be [lower, upper]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

void to_json(nlohmann::json& j, const ReservoirSpec& spec) {
  j = nlohmann::json{{"L", spec.qubits},
                     {"J", spec.coupling},
                     {"hx_range", {spec.hx_range.lower, spec.hx_range.upper}},
                     {"hz_range", {spec.hz_range.lower, spec.hz_range.upper}},
                     {"hI_range", {spec.hI_range.lower, spec.hI_range.upper}},
                     {"tau", spec.tau},
                     {"seed", spec.seed},
                     {"max_qubits", spec.max_qubits}};
}

void from_json(const nlohmann::json& j, ReservoirSpec& spec) {
  spec = ReservoirSpec{};
  if (j.contains("L")) spec.qubits = j.at("L").get<int>();
  if (j.contains("J")) spec.coupling = j.at("J").get<double>();
  if (j.contains("hx_range")) spec.hx_range = interval_from(j, "hx_range");
  if (j.contains("hz_range")) spec.hz_range = interval_from(j, "hz_range");
  if (j.contains("hI_range")) spec.hI_range = interval_from(j, "hI_range");
  if (j.contains("tau")) spec.tau = j.at("tau").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("max_qubits")) spec.max_qubits = j.at("max_qubits").get<int>();
  spec.validate();
}

namespace harness {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  reservoir.validate();
  inputs.validate();
  if (n_grid.empty()) throw ValidationError("config: n_grid must be nonempty");
  for (std::size_t n : n_grid)
    if (n < 1) throw ValidationError("config: n_grid entries must be >= 1");
  for (std::size_t k : kl_grid)
    if (k < 1) throw ValidationError("config: kl_grid entries must be >= 1");
  if (repetitions < 1) throw ValidationError("config: repetitions must be >= 1");
  if (shots < 1) throw ValidationError("config: shots must be >= 1");
  if (!(lambda > 0.0)) throw ValidationError("config: lambda must be > 0");
  if (quadrature.nodes < 2) throw ValidationError("config: quadrature.nodes must be >= 2");
  if (!(gram_threshold >= 0.0)) throw ValidationError("config: gram_threshold must be >= 0");
  if (task != "sgn" && task != "samples") throw ValidationError("config: task must be \"sgn\" or \"samples\"");
  if (task == "samples") {
    if (!task_samples) throw ValidationError("config: task \"samples\" needs task_samples");
    if (!fs::exists(*task_samples)) throw ValidationError("config: task samples file not found: " + task_samples->string());
  }
  if (spectrum_file && !fs::exists(*spectrum_file)) {
    throw ValidationError("config: spectrum file not found: " + spectrum_file->string());
  }
}

Target ExperimentConfig::make_target() const {
  if (task == "sgn") return Target::sgn();
  return Target::from_csv(task_samples->string());
}

ExperimentConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  const auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  ExperimentConfig cfg;
  try {
    if (j.contains("reservoir")) cfg.reservoir = j.at("reservoir").get<ReservoirSpec>();
    if (j.contains("task")) cfg.task = j.at("task").get<std::string>();
    if (j.contains("task_samples")) cfg.task_samples = resolve(j.at("task_samples").get<std::string>());
    if (j.contains("input_range")) {
      const auto& r = j.at("input_range");
      cfg.inputs = {r.at(0).get<double>(), r.at(1).get<double>()};
    }
    if (j.contains("lambda")) cfg.lambda = j.at("lambda").get<double>();
    if (j.contains("shots")) cfg.shots = j.at("shots").get<std::uint32_t>();
    if (j.contains("n_grid")) cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("kl_grid")) cfg.kl_grid = j.at("kl_grid").get<std::vector<std::size_t>>();
    if (j.contains("repetitions")) cfg.repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("quadrature")) {
      const auto& q = j.at("quadrature");
      if (q.contains("nodes")) cfg.quadrature.nodes = q.at("nodes").get<int>();
      if (q.contains("breakpoints")) cfg.quadrature.breakpoints = q.at("breakpoints").get<std::vector<double>>();
      if (q.contains("check_convergence")) cfg.quadrature.check_convergence = q.at("check_convergence").get<bool>();
      if (q.contains("convergence_tolerance")) cfg.quadrature.convergence_tolerance = q.at("convergence_tolerance").get<double>();
    }
    if (j.contains("gram_threshold")) cfg.gram_threshold = j.at("gram_threshold").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
    if (j.contains("spectrum_file")) cfg.spectrum_file = resolve(j.at("spectrum_file").get<std::string>());
    if (j.contains("workers")) cfg.workers = j.at("workers").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["reservoir"] = cfg.reservoir;
  j["task"] = cfg.task;
  if (cfg.task_samples) j["task_samples"] = cfg.task_samples->string();
  j["input_range"] = {cfg.inputs.lower, cfg.inputs.upper};
  j["lambda"] = cfg.lambda;
  j["shots"] = cfg.shots;
  j["n_grid"] = cfg.n_grid;
  j["kl_grid"] = cfg.kl_grid;
  j["repetitions"] = cfg.repetitions;
  j["quadrature"] = {{"nodes", cfg.quadrature.nodes},
                     {"breakpoints", cfg.quadrature.breakpoints},
                     {"check_convergence", cfg.quadrature.check_convergence},
                     {"convergence_tolerance", cfg.quadrature.convergence_tolerance}};
  j["gram_threshold"] = cfg.gram_threshold;
  j["seed"] = cfg.seed;
  if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir.string();
  if (cfg.spectrum_file) j["spectrum_file"] = cfg.spectrum_file->string();
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config file not found or unreadable: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

fs::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<fs::path>& cli_out) {
  if (cli_out) return *cli_out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("QRC_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fs::path("qrc-out");
}

}  // namespace harness
}  // namespace qrc
