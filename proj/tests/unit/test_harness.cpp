#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "qrc/error.hpp"
#include "qrc/harness/config.hpp"
#include "qrc/harness/experiments.hpp"
#include "qrc/harness/result_table.hpp"
#include "qrc/harness/svg_plot.hpp"
#include "qrc/harness/validate.hpp"

using namespace qrc;
using namespace qrc::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.reservoir.qubits = 2;
  cfg.n_grid = {4};
  cfg.repetitions = 1;
  cfg.workers = 1;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qrc_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<ResultRow> sample_rows() {
  std::vector<ResultRow> rows;
  for (std::size_t n : {10, 20})
    for (std::size_t r = 0; r < 4; ++r) {
      ResultRow row;
      row.experiment = "learning-curve";
      row.samples = n;
      row.repetition = r;
      row.eps_t = 0.1 * static_cast<double>(r + 1) / static_cast<double>(n);
      row.eps_g = 1.0 + std::sin(static_cast<double>(r * n));
      row.replica_t = 0.5;
      row.replica_g = 1.25;
      row.regime = "learning";
      row.seed = 1000 + r;
      rows.push_back(row);
    }
  return rows;
}

}  // namespace

TEST_CASE("config parsing with defaults and overrides") {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "reservoir": {"L": 3, "tau": 2.5, "hx_range": [-0.5, 0.5]},
    "lambda": 1e-7, "shots": 200, "n_grid": [5, 6], "repetitions": 3,
    "quadrature": {"nodes": 100}, "output_dir": "out"
  })");
  const ExperimentConfig cfg = config_from_json(j, "/base");
  CHECK(cfg.reservoir.qubits == 3);
  CHECK(cfg.reservoir.tau == 2.5);
  CHECK(cfg.reservoir.hx_range.lower == -0.5);
  CHECK(cfg.reservoir.hz_range.lower == -1.0);
  CHECK(cfg.lambda == 1e-7);
  CHECK(cfg.shots == 200);
  CHECK(cfg.n_grid == std::vector<std::size_t>{5, 6});
  CHECK(cfg.quadrature.nodes == 100);
  CHECK(cfg.output_dir == fs::path("/base/out"));
  CHECK(cfg.task == "sgn");

  const ExperimentConfig again = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(again) == config_to_json(cfg));
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"lambda": -1})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"n_grid": []})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"reservoir": {"L": 20}})")), DimensionOverflow);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"shots": "many"})")), ValidationError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"task": "xor"})")), ValidationError);
  try {
    load_config("/nonexistent/config.json");
    FAIL("expected an exception");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/config.json") != std::string::npos);
  }
}

TEST_CASE("output directory precedence") {
  ExperimentConfig cfg;
  ::unsetenv("QRC_OUTPUT_DIR");
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("qrc-out"));
  ::setenv("QRC_OUTPUT_DIR", "/tmp/from-env", 1);
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("/tmp/from-env"));
  cfg.output_dir = "/tmp/from-config";
  CHECK(resolve_output_dir(cfg, std::nullopt) == fs::path("/tmp/from-config"));
  CHECK(resolve_output_dir(cfg, fs::path("/tmp/from-cli")) == fs::path("/tmp/from-cli"));
  ::unsetenv("QRC_OUTPUT_DIR");
}

TEST_CASE("samples task reads a target table") {
  const fs::path dir = scratch("task");
  {
    std::ofstream f(dir / "target.csv");
    f << "u,f\n-1,0\n0,1\n1,0\n";
  }
  const ExperimentConfig cfg =
      config_from_json(nlohmann::json::parse(R"({"task": "samples", "task_samples": "target.csv"})"), dir);
  const Target t = cfg.make_target();
  CHECK(t(-0.5) == doctest::Approx(0.5));
  CHECK(t(0.25) == doctest::Approx(0.75));
  CHECK(t(2.0) == doctest::Approx(0.0));
}

TEST_CASE("aggregation matches an independent pass") {
  const std::vector<ResultRow> rows = sample_rows();
  const std::vector<AggregateRow> agg = aggregate(rows);
  REQUIRE(agg.size() == 4);
  std::map<std::pair<std::size_t, std::string>, std::vector<double>> groups;
  for (const ResultRow& r : rows) {
    groups[{r.samples, "eps_t"}].push_back(r.eps_t);
    groups[{r.samples, "eps_g"}].push_back(r.eps_g);
  }
  for (const AggregateRow& a : agg) {
    const std::vector<double>& v = groups[{a.samples, a.metric}];
    double sum = 0.0, sq = 0.0;
    for (double x : v) sum += x, sq += x * x;
    const double n = static_cast<double>(v.size());
    const double mean = sum / n;
    const double stderr_ = std::sqrt((sq - n * mean * mean) / (n - 1) / n);
    CHECK(a.count == v.size());
    CHECK(std::abs(a.mean - mean) < 1e-12);
    CHECK(std::abs(a.standard_error - stderr_) < 1e-12);
    CHECK(a.replica == (a.metric == "eps_t" ? 0.5 : 1.25));
  }
  CHECK(agg[0].metric == "eps_t");
  CHECK(agg[1].metric == "eps_g");
}

TEST_CASE("raw rows are sufficient to rebuild the aggregates") {
  const std::vector<ResultRow> rows = sample_rows();
  std::stringstream raw;
  write_raw_csv(raw, rows);
  const std::vector<ResultRow> back = read_raw_csv(raw);
  REQUIRE(back.size() == rows.size());
  std::ostringstream a, b;
  write_aggregate_csv(a, aggregate(rows));
  write_aggregate_csv(b, aggregate(back));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("# qrc-results v1 aggregate\nexperiment,N,K_L,metric,count,mean,stderr,replica,regime\n", 0) == 0);
}

TEST_CASE("single-repetition stderr is undefined and serialized as null") {
  std::vector<ResultRow> rows = sample_rows();
  rows.resize(1);
  const std::vector<AggregateRow> agg = aggregate(rows);
  CHECK(std::isnan(agg[0].standard_error));
  std::ostringstream json;
  write_table_json(json, {rows, agg});
  const nlohmann::json j = nlohmann::json::parse(json.str());
  CHECK(j["aggregate"][0]["stderr"].is_null());
}

TEST_CASE("SVG rendering is deterministic and skips unplottable points") {
  Series s{"data", {1, 10, 100, 1000}, {1e-3, 0.0, NAN, 1}, SeriesStyle::Markers, "#000000"};
  Series v{"mark", {30}, {}, SeriesStyle::VerticalLine, "#ff0000"};
  const PlotSpec spec{"t", "x", "y", true, true};
  const std::string a = render_svg(spec, {s, v});
  CHECK(a == render_svg(spec, {s, v}));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("nan") == std::string::npos);
  CHECK(a.find("mark") != std::string::npos);
}

TEST_CASE("experiment shape contract") {
  const Workbench bench(tiny_config());
  const RunResult lc = run_learning_curve(bench);
  CHECK(lc.complete);
  CHECK(lc.table.raw.size() == 1);
  REQUIRE(lc.table.aggregates.size() == 2);
  CHECK(lc.table.aggregates[0].metric == "eps_t");
  CHECK(lc.table.aggregates[1].metric == "eps_g");
  CHECK(lc.table.raw[0].regime == "learning");

  const TruncationResult tr = run_truncation_sweep(bench);
  CHECK(tr.run.table.raw.size() == bench.basis.effective_rank());
  REQUIRE(tr.optima.size() == 1);
  CHECK(tr.optima[0].optimal_index <= std::min<std::size_t>(bench.basis.effective_rank(), 4));
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_grid = {4, 9, 30};
  cfg.repetitions = 5;
  cfg.workers = 1;
  const Workbench one(cfg);
  cfg.workers = 4;
  const Workbench four(cfg);
  std::ostringstream a, b;
  write_raw_csv(a, run_learning_curve(one).table.raw);
  write_raw_csv(b, run_learning_curve(four).table.raw);
  CHECK(a.str() == b.str());
  std::ostringstream c, d;
  write_raw_csv(c, run_truncation_sweep(one).run.table.raw);
  write_raw_csv(d, run_truncation_sweep(four).run.table.raw);
  CHECK(c.str() == d.str());
}

TEST_CASE("full truncation reproduces the learning curve at small lambda") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_grid = {40};
  cfg.repetitions = 3;
  cfg.lambda = 1e-12;
  const Workbench bench(cfg);
  REQUIRE(bench.basis.effective_rank() == bench.basis.dimension());
  cfg.kl_grid = {bench.basis.effective_rank()};
  const Workbench full(cfg);
  const RunResult lc = run_learning_curve(full);
  const TruncationResult tr = run_truncation_sweep(full);
  REQUIRE(lc.table.raw.size() == tr.run.table.raw.size());
  for (std::size_t i = 0; i < lc.table.raw.size(); ++i) {
    CHECK(std::abs(lc.table.raw[i].eps_g - tr.run.table.raw[i].eps_g) < 1e-8);
    CHECK(std::abs(lc.table.raw[i].eps_t - tr.run.table.raw[i].eps_t) < 1e-8);
    CHECK(lc.table.raw[i].seed == tr.run.table.raw[i].seed);
  }
}

TEST_CASE("interpolation grid points are flagged in the truncation sweep") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_grid = {2};
  const Workbench bench(cfg);
  const TruncationResult tr = run_truncation_sweep(bench);
  for (const ResultRow& r : tr.run.table.raw) {
    if (r.kept - 1 >= r.samples) {
      CHECK(r.regime == "interpolation");
      CHECK(std::isinf(r.replica_g));
    } else {
      CHECK(r.regime == "learning");
    }
  }
}

TEST_CASE("kl grid beyond K_eff is rejected") {
  ExperimentConfig cfg = tiny_config();
  cfg.kl_grid = {99};
  const Workbench bench(cfg);
  CHECK_THROWS_AS(bench.kl_grid(), ValidationError);
}

TEST_CASE("interrupt stops scheduling and marks the run incomplete") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_grid = {4, 8};
  cfg.repetitions = 3;
  const Workbench bench(cfg);
  interrupt_flag().store(true);
  const RunResult r = run_learning_curve(bench);
  interrupt_flag().store(false);
  CHECK_FALSE(r.complete);
  CHECK(r.table.raw.empty());

  const fs::path dir = scratch("partial");
  const auto files = write_learning_curve(bench, r, {dir, OutputFormat::Csv, true});
  CHECK(fs::exists(dir / "learning_curve_raw.partial.csv"));
  CHECK_FALSE(fs::exists(dir / "learning_curve_aggregate.csv"));
}

TEST_CASE("parallel_for rethrows job failures") {
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 3) throw NumericalError("boom");
                  }),
                  NumericalError);
}

TEST_CASE("validation suite passes on the default reservoir") {
  ExperimentConfig cfg;
  cfg.workers = 1;
  const Workbench bench(cfg);
  for (const CheckResult& c : run_validation(bench)) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("output files") {
  ExperimentConfig cfg = tiny_config();
  cfg.n_grid = {4, 8};
  cfg.repetitions = 2;
  const Workbench bench(cfg);
  const fs::path dir = scratch("outputs");
  write_learning_curve(bench, run_learning_curve(bench), {dir, OutputFormat::Csv, true});
  write_truncation(bench, run_truncation_sweep(bench), {dir, OutputFormat::Json, true});
  write_spectrum_files(bench, dir);
  for (const char* name : {"learning_curve_raw.csv", "learning_curve_aggregate.csv", "learning_curve_summary.json",
                           "learning_curve_train.svg", "learning_curve_excess.svg", "truncation.json",
                           "truncation_summary.json", "truncation_N4.svg", "truncation_N8.svg", "moments.json",
                           "spectrum.csv", "basis.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / name), name);
  }
  std::ifstream s(dir / "truncation_summary.json");
  const nlohmann::json j = nlohmann::json::parse(s);
  CHECK(j["optima"].size() == 2);
  CHECK(j["spectrum"]["K"] == 4);
}
