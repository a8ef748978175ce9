#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qrc/eigentask.hpp"
#include "qrc/harness/config.hpp"
#include "qrc/harness/result_table.hpp"
#include "qrc/regression.hpp"
#include "qrc/replica.hpp"
#include "qrc/reservoir.hpp"

namespace qrc::harness {

// Everything derived once from a config: reservoir, moments, eigentask basis,
// the normalized target and its spectrum model. Immutable and shared by workers.
struct Workbench {
  explicit Workbench(ExperimentConfig cfg);

  ExperimentConfig config;
  Reservoir reservoir;
  MomentSet moments;
  EigentaskBasis basis;
  TargetDecomposition decomposition;
  Target target;  // normalized
  SpectrumModel spectrum;
  Capacities capacity;  // at config.shots

  // Seed of the training set for (N, repetition). Both experiments use it, so
  // they see the same datasets.
  std::uint64_t dataset_seed(std::size_t samples, std::size_t repetition) const;
  std::vector<std::size_t> kl_grid() const;  // config grid or 1..K_eff
};

// Set from a signal handler to stop scheduling new jobs.
std::atomic<bool>& interrupt_flag();

// Runs job(i) for i in [0, count) on `workers` threads (0: hardware concurrency).
// Rethrows the first job exception. Returns false if interrupted.
bool parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job);

struct RunResult {
  ResultTable table;
  bool complete = true;
};

// For each N and repetition: draw a dataset, fit ridge on all features, record
// eps_t and eps_g alongside the replica E_t, E_g for that N.
RunResult run_learning_curve(const Workbench& bench);

struct TruncationOptimum {
  std::size_t samples = 0;
  std::size_t optimal_index = 0;     // K_L* from the crossing condition
  std::size_t replica_argmin = 0;    // argmin of the truncated replica curve over the grid
  std::size_t empirical_argmin = 0;  // argmin of the mean empirical eps_g over the grid
};

struct TruncationResult {
  RunResult run;
  std::vector<TruncationOptimum> optima;
};

// For each N, K_L and repetition: fit in the first K_L eigentasks and record eps_g;
// the replica column is the truncated small-lambda curve. Grid points with
// K_L - 1 >= N are kept and flagged with regime "interpolation".
TruncationResult run_truncation_sweep(const Workbench& bench);

enum class OutputFormat { Csv, Json };

struct OutputOptions {
  std::filesystem::path directory;
  OutputFormat format = OutputFormat::Csv;
  bool plot = true;
};

// Writes learning_curve_{raw,aggregate}.csv (or learning_curve.json), summary.json,
// and two SVGs. Returns the written paths.
std::vector<std::filesystem::path> write_learning_curve(const Workbench& bench, const RunResult& result,
                                                        const OutputOptions& options);
std::vector<std::filesystem::path> write_truncation(const Workbench& bench, const TruncationResult& result,
                                                    const OutputOptions& options);
// moments.json, spectrum.csv and basis.csv.
std::vector<std::filesystem::path> write_spectrum_files(const Workbench& bench, const std::filesystem::path& dir);

}  // namespace qrc::harness
