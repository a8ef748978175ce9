#include "qrc/regression.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "qrc/error.hpp"

namespace qrc {

BasisMode BasisMode::eigentask_truncated(const EigentaskBasis& basis, std::size_t kept) {
  if (kept < 1 || kept > basis.effective_rank()) {
    throw ValidationError(fmt::format("eigentask truncation K_L = {} outside [1, {}]", kept, basis.effective_rank()));
  }
  BasisMode mode;
  mode.projection_ = basis.combinations.leftCols(static_cast<Eigen::Index>(kept));
  return mode;
}

Eigen::MatrixXd BasisMode::project(const Eigen::MatrixXd& features) const {
  if (!projection_) return features;
  if (features.cols() != projection_->rows()) throw ValidationError("basis projection: feature dimension mismatch");
  return features * *projection_;
}

Eigen::VectorXd BasisMode::to_feature_weights(const Eigen::VectorXd& weights) const {
  if (!projection_) return weights;
  return *projection_ * weights;
}

RidgeFit train_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double lambda,
                     const BasisMode& mode, const RidgeOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("train_ridge: lambda must be > 0");
  if (features.rows() != targets.size() || features.rows() == 0) {
    throw ValidationError("train_ridge: need matching, nonempty features and targets");
  }
  const Eigen::MatrixXd design = mode.project(features);
  Eigen::MatrixXd normal = design.transpose() * design;
  normal.diagonal().array() += lambda;

  Eigen::LLT<Eigen::MatrixXd> cholesky(normal);
  if (cholesky.info() != Eigen::Success) throw NumericalError("train_ridge: normal matrix is not positive definite");

  RidgeFit fit;
  fit.weights = cholesky.solve(design.transpose() * targets);
  fit.lambda = lambda;
  fit.basis = mode;
  const double rcond = cholesky.rcond();
  fit.condition_estimate = rcond > 0.0 ? 1.0 / rcond : INFINITY;
  fit.ill_conditioned = fit.condition_estimate > options.condition_warning;
  return fit;
}

RidgeFit train_ridge(const Dataset& dataset, double lambda, const BasisMode& mode, const RidgeOptions& options) {
  return train_ridge(dataset.feature_matrix(), dataset.target_vector(), lambda, mode, options);
}

double ridge_objective(const Eigen::VectorXd& weights, const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                       double lambda) {
  return (design * weights - targets).squaredNorm() / (2.0 * lambda) + 0.5 * weights.squaredNorm();
}

double training_error(const RidgeFit& fit, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
  if (features.rows() != targets.size() || features.rows() == 0) throw ValidationError("training_error: shape mismatch");
  const Eigen::VectorXd w = fit.feature_weights();
  if (w.size() != features.cols()) throw ValidationError("training_error: weight/feature dimension mismatch");
  return (features * w - targets).squaredNorm() / static_cast<double>(features.rows());
}

double training_error(const RidgeFit& fit, const Dataset& dataset) {
  return training_error(fit, dataset.feature_matrix(), dataset.target_vector());
}

double generalization_error(const Eigen::VectorXd& w, const MomentSet& moments, double shots,
                            const TargetDecomposition& target) {
  if (!(shots >= 1.0)) throw ValidationError("generalization_error: S must be >= 1");
  if (w.size() != moments.gram.rows() || target.feature_coefficients.size() != w.size()) {
    throw ValidationError("generalization_error: dimension mismatch");
  }
  const Eigen::VectorXd gw = moments.gram * w;
  double quadratic = w.dot(gw);
  if (std::isfinite(shots)) quadratic += w.dot(moments.noise * w) / shots;
  return quadratic - 2.0 * target.feature_coefficients.dot(gw) + 1.0;
}

std::vector<MonteCarloEstimate> empirical_test_error(const std::vector<Eigen::VectorXd>& weights,
                                                     const Reservoir& reservoir, const InputDistribution& dist,
                                                     std::uint32_t shots, std::size_t test_size, const Target& target,
                                                     RandomStream& stream) {
  if (test_size == 0) throw ValidationError("empirical_test_error: N' must be >= 1");
  for (const Eigen::VectorXd& w : weights) {
    if (static_cast<std::size_t>(w.size()) != reservoir.dimension()) {
      throw ValidationError("empirical_test_error: weight dimension mismatch");
    }
  }
  // Welford accumulation of the per-point losses.
  std::vector<double> mean(weights.size(), 0.0), m2(weights.size(), 0.0);
  for (std::size_t i = 0; i < test_size; ++i) {
    const double v = dist.sample(stream);
    const Eigen::VectorXd x = sample_shots(reservoir.features(v), shots, stream).noisy_features();
    const double f = target(v);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      const double residual = weights[j].dot(x) - f;
      const double loss = residual * residual;
      const double delta = loss - mean[j];
      mean[j] += delta / static_cast<double>(i + 1);
      m2[j] += delta * (loss - mean[j]);
    }
  }
  std::vector<MonteCarloEstimate> out(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j) {
    out[j].mean = mean[j];
    out[j].samples = test_size;
    out[j].standard_error = test_size > 1 ? std::sqrt(m2[j] / static_cast<double>(test_size - 1) / static_cast<double>(test_size))
                                          : INFINITY;
  }
  return out;
}

MonteCarloEstimate empirical_test_error(const Eigen::VectorXd& w, const Reservoir& reservoir,
                                        const InputDistribution& dist, std::uint32_t shots, std::size_t test_size,
                                        const Target& target, RandomStream& stream) {
  return empirical_test_error(std::vector<Eigen::VectorXd>{w}, reservoir, dist, shots, test_size, target, stream).front();
}

void write_fit_csv(std::ostream& out, const RidgeFit& fit, std::uint64_t seed) {
  out << "# qrc-fit v1\n";
  out << fmt::format("# lambda={:.17g}\n", fit.lambda);
  out << "# basis_mode=" << fit.basis.name() << '\n';
  out << "# K_L=" << fit.basis.kept() << '\n';
  out << "# seed=" << seed << '\n';
  out << "k,weight\n";
  for (Eigen::Index k = 0; k < fit.weights.size(); ++k) out << k << ',' << fmt::format("{:.17g}", fit.weights(k)) << '\n';
}

}  // namespace qrc
