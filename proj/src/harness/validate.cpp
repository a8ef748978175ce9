#include "qrc/harness/validate.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qrc/random.hpp"
#include "qrc/sampling.hpp"

namespace qrc::harness {

namespace {

CheckResult check(std::string name, double value, double tolerance) {
  return {std::move(name), std::isfinite(value) && value <= tolerance, fmt::format("{:.3e} (tolerance {:.1e})", value, tolerance)};
}

}  // namespace

std::vector<CheckResult> run_validation(const Workbench& bench) {
  std::vector<CheckResult> out;
  const MomentSet& m = bench.moments;
  const EigentaskBasis& basis = bench.basis;
  const ExperimentConfig& cfg = bench.config;

  double simplex = 0.0;
  RandomStream stream(derive_seed(cfg.seed, {0x56414c}));
  for (int i = 0; i < 64; ++i) {
    const FeatureVector x = bench.reservoir.features(cfg.inputs.sample(stream));
    simplex = std::max({simplex, std::abs(x.values.sum() - 1.0), std::max(0.0, -x.values.minCoeff())});
  }
  out.push_back(check("features lie on the simplex", simplex, 1e-9));

  out.push_back(check("gram symmetric", (m.gram - m.gram.transpose()).cwiseAbs().maxCoeff(), 1e-12));
  out.push_back(check("noise symmetric", (m.noise - m.noise.transpose()).cwiseAbs().maxCoeff(), 1e-12));
  out.push_back(check("V = diag(d) - G", m.identity_residual, 1e-10));

  const Eigen::MatrixXd& r = basis.combinations;
  const auto k = static_cast<Eigen::Index>(basis.effective_rank());
  const Eigen::MatrixXd rgr = r.transpose() * m.gram * r;
  const Eigen::MatrixXd rvr = r.transpose() * m.noise * r;
  out.push_back(check("R^T G R = I", (rgr - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-8));
  Eigen::MatrixXd diag_beta = basis.beta_sq.asDiagonal();
  const double vscale = std::max(1.0, basis.beta_sq.cwiseAbs().maxCoeff());
  out.push_back(check("R^T V R = diag(beta^2) (relative)", (rvr - diag_beta).cwiseAbs().maxCoeff() / vscale, 1e-8));
  out.push_back(check("beta_1^2 = 0", std::abs(basis.beta_sq(0)), 1e-10));
  bool sorted = true;
  for (Eigen::Index i = 1; i < k; ++i) sorted = sorted && basis.beta_sq(i) >= basis.beta_sq(i - 1);
  out.push_back({"beta^2 ascending", sorted, sorted ? "ok" : "not sorted"});

  const TargetDecomposition& d = bench.decomposition;
  out.push_back(check("Parseval residual", std::abs(d.residual_power - d.residual_power_direct), 1e-8));
  out.push_back(check("residual power non-negative", std::max(0.0, -d.residual_power), 1e-8));

  for (std::size_t n : cfg.n_grid) {
    const std::vector<double> beta = bench.spectrum.padded_beta_sq();
    const double kappa = solve_kappa(beta, static_cast<double>(n), cfg.shots, cfg.lambda);
    double sum = 0.0;
    for (std::size_t i = 1; i < beta.size(); ++i) {
      const double b = beta[i] / cfg.shots;
      sum += std::isinf(b) ? 1.0 / n : (1.0 + b) / (n * (1.0 + b) + kappa);
    }
    const double residual = std::abs(kappa - cfg.lambda - kappa * sum) / std::max(kappa, 1e-300);
    out.push_back(check(fmt::format("kappa fixed point (N = {})", n), kappa == 0.0 ? 0.0 : residual, 1e-9));
  }

  const std::size_t n = std::min<std::size_t>(cfg.n_grid.front() * 4, 256);
  const Dataset ds = generate_dataset(bench.reservoir, cfg.inputs, n, cfg.shots, bench.target, bench.dataset_seed(n, 0));
  const Dataset again = generate_dataset(bench.reservoir, cfg.inputs, n, cfg.shots, bench.target, bench.dataset_seed(n, 0));
  bool same = true;
  for (std::size_t i = 0; i < ds.size(); ++i) same = same && ds.records[i].counts == again.records[i].counts;
  out.push_back({"dataset reproducible from seed", same, same ? "ok" : "shot counts differ"});

  const double lambda = std::max(cfg.lambda, 1e-8);
  const RidgeFit fit = train_ridge(ds, lambda);
  const Eigen::MatrixXd phi = ds.feature_matrix();
  const Eigen::VectorXd grad = (phi.transpose() * phi + lambda * Eigen::MatrixXd::Identity(phi.cols(), phi.cols())) * fit.weights -
                               phi.transpose() * ds.target_vector();
  out.push_back(check("ridge normal equations (relative)", grad.norm() / std::max(1.0, (phi.transpose() * ds.target_vector()).norm()), 1e-8));
  return out;
}

}  // namespace qrc::harness
