#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrc/eigentask.hpp"
#include "qrc/random.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/sampling.hpp"
#include "qrc/task.hpp"

namespace qrc {

// Which coordinates the output weights live in: the K raw noisy features, or the
// first K_L eigentask projections Y_k = r^(k) . X.
class BasisMode {
 public:
  static BasisMode original_features() { return BasisMode{}; }
  static BasisMode eigentask_truncated(const EigentaskBasis& basis, std::size_t kept);

  bool truncated() const noexcept { return projection_.has_value(); }
  // K_L for truncated mode, 0 for original features.
  std::size_t kept() const noexcept { return truncated() ? static_cast<std::size_t>(projection_->cols()) : 0; }
  std::string name() const { return truncated() ? "eigentask-truncated" : "original-features"; }

  // N x K noisy features -> N x K_used training design.
  Eigen::MatrixXd project(const Eigen::MatrixXd& features) const;
  // Maps weights in this basis back to the K original features.
  Eigen::VectorXd to_feature_weights(const Eigen::VectorXd& weights) const;

 private:
  std::optional<Eigen::MatrixXd> projection_;
};

struct RidgeOptions {
  // Warn (ill_conditioned = true) above this condition estimate.
  double condition_warning = 1e12;
};

struct RidgeFit {
  Eigen::VectorXd weights;  // in the basis of `basis`
  double lambda = 0.0;
  BasisMode basis;
  double condition_estimate = 1.0;
  bool ill_conditioned = false;

  Eigen::VectorXd feature_weights() const { return basis.to_feature_weights(weights); }
};

// Minimizes H(w) = (1/2 lambda) sum_n (w . Phi_n - f_n)^2 + |w|^2 / 2 by solving
// (Phi^T Phi + lambda I) w = Phi^T f with a Cholesky factorization.
// `features` holds the N x K raw noisy features; the basis mode projects them.
RidgeFit train_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double lambda,
                     const BasisMode& mode = BasisMode::original_features(), const RidgeOptions& options = {});
RidgeFit train_ridge(const Dataset& dataset, double lambda, const BasisMode& mode = BasisMode::original_features(),
                     const RidgeOptions& options = {});

// H(w) for weights in the same coordinates as `design`.
double ridge_objective(const Eigen::VectorXd& weights, const Eigen::MatrixXd& design, const Eigen::VectorXd& targets,
                       double lambda);

// (1/N) sum_n (w . X(u_n) - f*(u_n))^2 on raw noisy features.
double training_error(const RidgeFit& fit, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets);
double training_error(const RidgeFit& fit, const Dataset& dataset);

// w^T (G + V/S) w - 2 c^T G w + 1 for w in original-feature coordinates (the
// target is normalized). S = +inf drops the noise term.
double generalization_error(const Eigen::VectorXd& feature_weights, const MomentSet& moments, double shots,
                            const TargetDecomposition& target);

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

// Testing error on N' fresh inputs with fresh shots. `target` should be the
// normalized target (target.scaled(decomposition.scale)).
MonteCarloEstimate empirical_test_error(const Eigen::VectorXd& feature_weights, const Reservoir& reservoir,
                                        const InputDistribution& dist, std::uint32_t shots, std::size_t test_size,
                                        const Target& target, RandomStream& stream);

// Weight CSV (k,weight) preceded by "# key=value" metadata lines.
// Same estimate for several weight vectors on one shared test stream; entry j
// equals the single-vector call for weights[j] on an identical stream.
std::vector<MonteCarloEstimate> empirical_test_error(const std::vector<Eigen::VectorXd>& weights,
                                                     const Reservoir& reservoir, const InputDistribution& dist,
                                                     std::uint32_t shots, std::size_t test_size, const Target& target,
                                                     RandomStream& stream);

void write_fit_csv(std::ostream& out, const RidgeFit& fit, std::uint64_t seed);

}  // namespace qrc
