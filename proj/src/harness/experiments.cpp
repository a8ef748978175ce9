#include "qrc/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "qrc/error.hpp"
#include "qrc/harness/svg_plot.hpp"
#include "qrc/random.hpp"
#include "qrc/sampling.hpp"

namespace qrc::harness {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDatasetTag = 0x44415441;  // distinguishes dataset streams from other uses of the seed
constexpr double kInf = std::numeric_limits<double>::infinity();

ExperimentConfig validated(ExperimentConfig cfg) {
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw NumericalError("cannot write " + path.string());
  return out;
}

std::vector<double> as_doubles(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

Workbench::Workbench(ExperimentConfig cfg)
    : config(validated(std::move(cfg))),
      reservoir(build_reservoir(config.reservoir)),
      moments(compute_moments(reservoir, config.inputs, config.quadrature)),
      basis(solve_eigentasks(moments, config.gram_threshold)),
      decomposition(decompose_target(config.make_target(), reservoir, basis, config.inputs, config.quadrature)),
      target(config.make_target().scaled(decomposition.scale)),
      spectrum(SpectrumModel::from_basis(basis, decomposition)),
      capacity(capacities(decomposition.eigentask_coefficients, basis.beta_sq, config.shots)) {}

std::uint64_t Workbench::dataset_seed(std::size_t samples, std::size_t repetition) const {
  return derive_seed(config.seed, {kDatasetTag, samples, repetition});
}

std::vector<std::size_t> Workbench::kl_grid() const {
  if (!config.kl_grid.empty()) {
    for (std::size_t k : config.kl_grid) {
      if (k > basis.effective_rank()) {
        throw ValidationError(fmt::format("config: kl_grid entry {} exceeds K_eff = {}", k, basis.effective_rank()));
      }
    }
    return config.kl_grid;
  }
  std::vector<std::size_t> grid(basis.effective_rank());
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = k + 1;
  return grid;
}

std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

bool parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& job) {
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      if (interrupt_flag().load()) return;
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return !interrupt_flag().load();
}

RunResult run_learning_curve(const Workbench& bench) {
  const ExperimentConfig& cfg = bench.config;
  const std::size_t reps = cfg.repetitions;

  struct Theory {
    double t, g;
    std::string regime;
  };
  std::vector<Theory> theory;
  for (std::size_t n : cfg.n_grid) {
    const auto samples = static_cast<double>(n);
    const std::string regime = to_string(classify_regime(samples, bench.spectrum.total_count));
    try {
      const ReplicaPrediction p = predict_errors(bench.spectrum, samples, cfg.shots, cfg.lambda);
      theory.push_back({p.training_error, p.generalization_error, regime});
    } catch (const DivergentPrediction&) {
      theory.push_back({kInf, kInf, regime});
    }
  }

  std::vector<ResultRow> rows(cfg.n_grid.size() * reps);
  std::vector<char> done(rows.size(), 0);
  const bool complete = parallel_for(rows.size(), cfg.workers, [&](std::size_t job) {
    const std::size_t gi = job / reps, rep = job % reps;
    const std::size_t n = cfg.n_grid[gi];
    const std::uint64_t seed = bench.dataset_seed(n, rep);
    const Dataset ds = generate_dataset(bench.reservoir, cfg.inputs, n, cfg.shots, bench.target, seed);
    const RidgeFit fit = train_ridge(ds, cfg.lambda);
    ResultRow& row = rows[job];
    row.experiment = "learning-curve";
    row.samples = n;
    row.kept = 0;
    row.repetition = rep;
    row.eps_t = training_error(fit, ds);
    row.eps_g = generalization_error(fit.feature_weights(), bench.moments, cfg.shots, bench.decomposition);
    row.replica_t = theory[gi].t;
    row.replica_g = theory[gi].g;
    row.regime = theory[gi].regime;
    row.seed = seed;
    done[job] = 1;
  });

  RunResult result;
  result.complete = complete;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (done[i]) result.table.raw.push_back(std::move(rows[i]));
  result.table.aggregates = aggregate(result.table.raw);
  return result;
}

TruncationResult run_truncation_sweep(const Workbench& bench) {
  const ExperimentConfig& cfg = bench.config;
  const std::vector<std::size_t> grid = bench.kl_grid();
  const std::size_t reps = cfg.repetitions;

  std::vector<BasisMode> modes;
  modes.reserve(grid.size());
  for (std::size_t k : grid) modes.push_back(BasisMode::eigentask_truncated(bench.basis, k));

  // Rows are laid out [N][K_L][rep]; one job fills every K_L for one (N, rep)
  // dataset.
  std::vector<ResultRow> rows(cfg.n_grid.size() * grid.size() * reps);
  std::vector<char> done(cfg.n_grid.size() * reps, 0);
  const auto index = [&](std::size_t gi, std::size_t ki, std::size_t rep) { return (gi * grid.size() + ki) * reps + rep; };

  const bool complete = parallel_for(cfg.n_grid.size() * reps, cfg.workers, [&](std::size_t job) {
    const std::size_t gi = job / reps, rep = job % reps;
    const std::size_t n = cfg.n_grid[gi];
    const std::uint64_t seed = bench.dataset_seed(n, rep);
    const Dataset ds = generate_dataset(bench.reservoir, cfg.inputs, n, cfg.shots, bench.target, seed);
    const Eigen::MatrixXd features = ds.feature_matrix();
    const Eigen::VectorXd targets = ds.target_vector();
    for (std::size_t ki = 0; ki < grid.size(); ++ki) {
      const RidgeFit fit = train_ridge(features, targets, cfg.lambda, modes[ki]);
      const TruncatedPrediction p = predict_truncated(bench.spectrum, static_cast<double>(n), cfg.shots, grid[ki]);
      ResultRow& row = rows[index(gi, ki, rep)];
      row.experiment = "truncation";
      row.samples = n;
      row.kept = grid[ki];
      row.repetition = rep;
      row.eps_t = training_error(fit, features, targets);
      row.eps_g = generalization_error(fit.feature_weights(), bench.moments, cfg.shots, bench.decomposition);
      row.replica_g = p.generalization_error;
      row.replica_t = p.divergent ? kInf : (1.0 - p.gamma) * (1.0 - p.gamma) * p.generalization_error;
      row.regime = p.divergent ? "interpolation" : "learning";
      row.seed = seed;
    }
    done[job] = 1;
  });

  TruncationResult result;
  result.run.complete = complete;
  for (std::size_t gi = 0; gi < cfg.n_grid.size(); ++gi)
    for (std::size_t ki = 0; ki < grid.size(); ++ki)
      for (std::size_t rep = 0; rep < reps; ++rep)
        if (done[gi * reps + rep]) result.run.table.raw.push_back(std::move(rows[index(gi, ki, rep)]));
  result.run.table.aggregates = aggregate(result.run.table.raw);

  for (std::size_t n : cfg.n_grid) {
    TruncationOptimum opt;
    opt.samples = n;
    opt.optimal_index = optimal_truncation(bench.spectrum.beta_sq, n, cfg.shots, bench.spectrum.total_count);
    double best_replica = kInf, best_empirical = kInf;
    for (const AggregateRow& a : result.run.table.aggregates) {
      if (a.samples != n || a.metric != "eps_g") continue;
      if (a.replica < best_replica) best_replica = a.replica, opt.replica_argmin = a.kept;
      if (a.mean < best_empirical) best_empirical = a.mean, opt.empirical_argmin = a.kept;
    }
    result.optima.push_back(opt);
  }
  return result;
}

namespace {

nlohmann::json spectrum_summary(const Workbench& bench) {
  nlohmann::json j;
  j["K"] = bench.basis.dimension();
  j["K_eff"] = bench.basis.effective_rank();
  j["beta_sq"] = bench.spectrum.beta_sq;
  j["a"] = bench.spectrum.coefficients;
  j["residual_power"] = bench.spectrum.residual_power;
  j["functional_capacity"] = bench.capacity.functional;
  j["resolvable_capacity"] = bench.capacity.resolvable;
  j["large_N_limit"] = 1.0 - bench.capacity.functional;
  j["target_scale"] = bench.decomposition.scale;
  j["moment_identity_residual"] = bench.moments.identity_residual;
  j["fields"] = {{"hx", bench.reservoir.hx}, {"hz", bench.reservoir.hz}, {"hI", bench.reservoir.hI}};
  return j;
}

void write_table(const fs::path& dir, const std::string& stem, const RunResult& result, OutputFormat format,
                 std::vector<fs::path>& written) {
  const std::string suffix = result.complete ? "" : ".partial";
  if (format == OutputFormat::Json) {
    const fs::path p = dir / (stem + suffix + ".json");
    auto out = open_output(p);
    write_table_json(out, result.table);
    written.push_back(p);
    return;
  }
  const fs::path raw = dir / (stem + "_raw" + suffix + ".csv");
  auto out = open_output(raw);
  write_raw_csv(out, result.table.raw);
  written.push_back(raw);
  if (result.complete) {
    const fs::path agg = dir / (stem + "_aggregate.csv");
    auto a = open_output(agg);
    write_aggregate_csv(a, result.table.aggregates);
    written.push_back(agg);
  }
}

void write_text(const fs::path& p, const std::string& text, std::vector<fs::path>& written) {
  auto out = open_output(p);
  out << text;
  written.push_back(p);
}

}  // namespace

std::vector<fs::path> write_learning_curve(const Workbench& bench, const RunResult& result, const OutputOptions& options) {
  fs::create_directories(options.directory);
  std::vector<fs::path> written;
  write_table(options.directory, "learning_curve", result, options.format, written);

  nlohmann::json summary;
  summary["format"] = "qrc-summary v1";
  summary["experiment"] = "learning-curve";
  summary["complete"] = result.complete;
  summary["config"] = config_to_json(bench.config);
  summary["spectrum"] = spectrum_summary(bench);
  write_text(options.directory / "learning_curve_summary.json", summary.dump(1) + "\n", written);

  if (!options.plot || !result.complete) return written;
  const double limit = 1.0 - bench.capacity.functional;
  Series dots_t{"empirical", {}, {}, SeriesStyle::Dots, "#ff7f00"};
  Series dots_g = dots_t;
  for (const ResultRow& r : result.table.raw) {
    dots_t.x.push_back(static_cast<double>(r.samples));
    dots_t.y.push_back(r.eps_t);
    dots_g.x.push_back(static_cast<double>(r.samples));
    dots_g.y.push_back(r.eps_g - limit);
  }
  Series mean_t{"mean", {}, {}, SeriesStyle::Markers, "#e31a1c"}, mean_g = mean_t;
  Series theory_t{"replica", {}, {}, SeriesStyle::Line, "#6a3d9a"}, theory_g = theory_t;
  for (const AggregateRow& a : result.table.aggregates) {
    Series& m = a.metric == "eps_t" ? mean_t : mean_g;
    Series& th = a.metric == "eps_t" ? theory_t : theory_g;
    const double shift = a.metric == "eps_t" ? 0.0 : limit;
    m.x.push_back(static_cast<double>(a.samples));
    m.y.push_back(a.mean - shift);
    th.x.push_back(static_cast<double>(a.samples));
    th.y.push_back(a.replica - shift);
  }
  const std::vector<double> ns = as_doubles(bench.config.n_grid);
  Series asymptote{"1 - C[f*]", ns, std::vector<double>(ns.size(), limit), SeriesStyle::DashedLine, "#888888"};

  write_text(options.directory / "learning_curve_train.svg",
             render_svg({"Training error", "N", "E_t", true, false}, {dots_t, mean_t, theory_t, asymptote}), written);
  write_text(options.directory / "learning_curve_excess.svg",
             render_svg({"Generalization error excess", "N", "E_g - (1 - C[f*])", true, true}, {dots_g, mean_g, theory_g}),
             written);
  return written;
}

std::vector<fs::path> write_truncation(const Workbench& bench, const TruncationResult& result, const OutputOptions& options) {
  fs::create_directories(options.directory);
  std::vector<fs::path> written;
  write_table(options.directory, "truncation", result.run, options.format, written);

  nlohmann::json summary;
  summary["format"] = "qrc-summary v1";
  summary["experiment"] = "truncation";
  summary["complete"] = result.run.complete;
  summary["config"] = config_to_json(bench.config);
  summary["spectrum"] = spectrum_summary(bench);
  summary["optima"] = nlohmann::json::array();
  for (const TruncationOptimum& o : result.optima) {
    summary["optima"].push_back({{"N", o.samples},
                                 {"K_L_star", o.optimal_index},
                                 {"replica_argmin", o.replica_argmin},
                                 {"empirical_argmin", o.empirical_argmin}});
  }
  write_text(options.directory / "truncation_summary.json", summary.dump(1) + "\n", written);

  if (!options.plot || !result.run.complete) return written;
  const double limit = 1.0 - bench.capacity.functional;
  for (const TruncationOptimum& o : result.optima) {
    Series dots{"empirical", {}, {}, SeriesStyle::Dots, "#ff7f00"};
    Series mean{"mean", {}, {}, SeriesStyle::Markers, "#e31a1c"};
    Series theory{"replica", {}, {}, SeriesStyle::Line, "#6a3d9a"};
    for (const ResultRow& r : result.run.table.raw) {
      if (r.samples != o.samples) continue;
      dots.x.push_back(static_cast<double>(r.kept));
      dots.y.push_back(r.eps_g - limit);
    }
    for (const AggregateRow& a : result.run.table.aggregates) {
      if (a.samples != o.samples || a.metric != "eps_g") continue;
      mean.x.push_back(static_cast<double>(a.kept));
      mean.y.push_back(a.mean - limit);
      theory.x.push_back(static_cast<double>(a.kept));
      theory.y.push_back(a.replica - limit);
    }
    Series marker{fmt::format("K_L* = {}", o.optimal_index), {static_cast<double>(o.optimal_index)}, {}, SeriesStyle::VerticalLine, "#1f78b4"};
    write_text(options.directory / fmt::format("truncation_N{}.svg", o.samples),
               render_svg({fmt::format("Eigentask truncation, N = {}", o.samples), "K_L", "E_g - (1 - C[f*])", false, true},
                          {dots, mean, theory, marker}),
               written);
  }
  return written;
}

std::vector<fs::path> write_spectrum_files(const Workbench& bench, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  {
    const fs::path p = dir / "moments.json";
    auto out = open_output(p);
    write_moments_json(out, bench.moments);
    written.push_back(p);
  }
  {
    const fs::path p = dir / "spectrum.csv";
    auto out = open_output(p);
    write_spectrum_csv(out, bench.spectrum);
    written.push_back(p);
  }
  {
    const fs::path p = dir / "basis.csv";
    auto out = open_output(p);
    write_basis_csv(out, bench.basis);
    written.push_back(p);
  }
  return written;
}

}  // namespace qrc::harness
