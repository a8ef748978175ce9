#include "qrc/harness/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qrc/error.hpp"
#include "qrc/harness/config.hpp"
#include "qrc/harness/experiments.hpp"
#include "qrc/harness/validate.hpp"
#include "qrc/replica.hpp"

namespace qrc::harness {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> repetitions;
  std::optional<unsigned> workers;
  std::string format = "csv";
  std::string plot = "on";
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = o.config ? load_config(*o.config) : ExperimentConfig{};
  if (o.seed) cfg.seed = *o.seed;
  if (o.repetitions) cfg.repetitions = *o.repetitions;
  if (o.workers) cfg.workers = *o.workers;
  cfg.validate();
  return cfg;
}

OutputOptions output_options(const Options& o, const ExperimentConfig& cfg) {
  OutputOptions out;
  out.directory = resolve_output_dir(cfg, o.out ? std::optional<fs::path>(*o.out) : std::nullopt);
  out.format = o.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
  out.plot = o.plot == "on";
  return out;
}

void list(std::ostream& out, const std::vector<fs::path>& paths) {
  for (const fs::path& p : paths) fmt::print(out, "wrote {}\n", p.string());
}

int cmd_spectrum(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const Workbench bench(cfg);
  fmt::print(out, "K = {}  K_eff = {}  C[f*] = {:.6g}  C_T = {:.6g}  E[f_perp^2] = {:.3e}\n", bench.basis.dimension(),
             bench.basis.effective_rank(), bench.capacity.functional, bench.capacity.resolvable,
             bench.decomposition.residual_power);
  for (std::size_t k = 0; k < bench.spectrum.beta_sq.size(); ++k) {
    fmt::print(out, "{:>4}  beta^2 = {:<14.6e} a = {: .6e}\n", k + 1, bench.spectrum.beta_sq[k],
               bench.spectrum.coefficients[k]);
  }
  list(out, write_spectrum_files(bench, output_options(o, cfg).directory));
  return 0;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  SpectrumModel model;
  if (cfg.spectrum_file) {
    std::ifstream in(*cfg.spectrum_file);
    if (!in) throw ValidationError("cannot read spectrum file " + cfg.spectrum_file->string());
    model = read_spectrum_csv(in);
  } else {
    const Workbench bench(cfg);
    model = bench.spectrum;
  }
  model.validate();

  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "N,regime,kappa,gamma,E_t,E_g,K_L_star\n";
  for (std::size_t n : cfg.n_grid) {
    const auto samples = static_cast<double>(n);
    const std::size_t kl = optimal_truncation(model.beta_sq, n, cfg.shots, model.total_count);
    std::optional<ReplicaPrediction> p;
    try {
      p = predict_errors(model, samples, cfg.shots, cfg.lambda);
    } catch (const DivergentPrediction&) {
    }
    const std::string regime = to_string(classify_regime(samples, model.total_count));
    nlohmann::json r{{"N", n}, {"regime", regime}, {"K_L_star", kl}, {"divergent", !p}};
    if (p) {
      r["kappa"] = p->kappa;
      r["gamma"] = p->gamma;
      r["E_t"] = p->training_error;
      r["E_g"] = p->generalization_error;
      csv += fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", n, regime, p->kappa, p->gamma,
                         p->training_error, p->generalization_error, kl);
    } else {
      csv += fmt::format("{},{},nan,inf,inf,inf,{}\n", n, regime, kl);
    }
    rows.push_back(r);
  }

  const OutputOptions opts = output_options(o, cfg);
  fs::create_directories(opts.directory);
  const bool json = opts.format == OutputFormat::Json;
  const fs::path path = opts.directory / (json ? "predictions.json" : "predictions.csv");
  const std::string text = json ? rows.dump(1) + "\n" : csv;
  std::ofstream file(path);
  if (!(file << text)) throw NumericalError("cannot write " + path.string());
  out << text;
  fmt::print(out, "wrote {}\n", path.string());
  return 0;
}

int cmd_learning_curve(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const Workbench bench(cfg);
  const RunResult result = run_learning_curve(bench);
  list(out, write_learning_curve(bench, result, output_options(o, cfg)));
  if (!result.complete) throw NumericalError("interrupted; partial results were written");
  return 0;
}

int cmd_truncation(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const Workbench bench(cfg);
  const TruncationResult result = run_truncation_sweep(bench);
  for (const TruncationOptimum& opt : result.optima) {
    fmt::print(out, "N = {}: K_L* = {}  replica argmin = {}  empirical argmin = {}\n", opt.samples, opt.optimal_index,
               opt.replica_argmin, opt.empirical_argmin);
  }
  list(out, write_truncation(bench, result, output_options(o, cfg)));
  if (!result.run.complete) throw NumericalError("interrupted; partial results were written");
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const ExperimentConfig cfg = load(o);
  const Workbench bench(cfg);
  bool ok = true;
  for (const CheckResult& c : run_validation(bench)) {
    fmt::print(out, "[{}] {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantum reservoir feature maps under shot noise: eigentasks, ridge fits and replica predictions"};
  app.require_subcommand(1);
  Options o;

  using Handler = int (*)(const Options&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands{
      {"spectrum", "compute moments, eigentask spectrum and target coefficients", cmd_spectrum},
      {"predict", "replica predictions of E_t, E_g and K_L* over the N grid", cmd_predict},
      {"learning-curve", "empirical learning curve against the replica prediction", cmd_learning_curve},
      {"truncation", "eigentask truncation sweep and optimal K_L", cmd_truncation},
      {"validate", "quick invariant checks", cmd_validate},
  };
  std::map<CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed for the datasets");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--repetitions", o.repetitions, "repetitions per grid point");
    sub->add_option("--workers", o.workers, "worker threads (0: all cores)");
    sub->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--plot", o.plot, "write SVG plots")->check(CLI::IsMember({"on", "off"}));
    handlers[sub] = handler;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    err << msg.str();
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    for (const auto& [sub, handler] : handlers)
      if (sub->parsed()) return handler(o, out);
    return 1;
  } catch (const ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  }
}

}  // namespace qrc::harness
