#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrc/eigentask.hpp"

namespace qrc {

// Eigen-NSRs with the target's eigentask coefficients. `total_count` may exceed
// beta_sq.size(): the extra directions (discarded by the Gram threshold) are
// treated as pure-noise eigentasks with beta^2 = +inf and a_k = 0.
struct SpectrumModel {
  std::vector<double> beta_sq;
  std::vector<double> coefficients;
  double residual_power = 0.0;
  std::size_t total_count = 0;

  void validate() const;
  // beta_sq padded with +inf up to total_count.
  std::vector<double> padded_beta_sq() const;
  double coefficient(std::size_t k) const { return k < coefficients.size() ? coefficients[k] : 0.0; }

  static SpectrumModel from_basis(const EigentaskBasis& basis, const TargetDecomposition& target);
};

enum class Regime { Interpolation, Boundary, Learning };
std::string to_string(Regime regime);
// N < K-1, N == K-1, N > K-1 for K eigentasks.
Regime classify_regime(double samples, std::size_t total_count);

struct ReplicaPrediction {
  double kappa = 0.0;
  double gamma = 0.0;
  double training_error = 0.0;
  double generalization_error = 0.0;
  Regime regime = Regime::Learning;
};

// Signal capture threshold: the nonnegative root of
//   kappa = lambda + kappa * sum_{k>1} (1 + b_k) / (N (1 + b_k) + kappa),  b_k = beta_k^2 / S,
// by bisection to 1e-12 relative. beta_sq[0] is the constant eigentask and is
// skipped. lambda = 0 with N > K-1 returns exactly 0.
double solve_kappa(std::span<const double> beta_sq, double samples, double shots, double lambda);

// Overfitting factor gamma = sum_{k>1} N (1 + b_k)^2 / (N (1 + b_k) + kappa)^2.
double overfitting_factor(std::span<const double> beta_sq, double samples, double shots, double kappa);

// Average training and generalization errors. Throws DivergentPrediction if gamma >= 1.
// For kappa = 0 (lambda = 0, N > K-1) E_t takes its lambda -> 0 limit (1 - gamma)^2 E_g.
ReplicaPrediction predict_errors(const SpectrumModel& model, double samples, double shots, double lambda);

// Small-lambda curve when training on the first K_L eigentasks, K_L - 1 < N:
//   E_g(K_L) = N / (N - K_L + 1) * (sum_{k<=K_L} a_k^2 b_k/(1+b_k) + sum_{k>K_L} a_k^2 + E[f_perp^2]).
struct TruncatedPrediction {
  std::size_t kept = 0;
  double gamma = 0.0;
  double generalization_error = 0.0;
  bool divergent = false;  // K_L - 1 >= N; generalization_error is +inf
};
TruncatedPrediction predict_truncated(const SpectrumModel& model, double samples, double shots, std::size_t kept);

// E_g(K_L + 1) - E_g(K_L) from predict_truncated. Throws DivergentPrediction if
// either point is divergent.
double delta_Eg(const SpectrumModel& model, double samples, double shots, std::size_t kept);

// First-order approximation of delta_Eg:
//   (1 - C_{K_L}) / (N (1 - gamma)^2) - a_{K_L+1}^2 / ((1 - gamma)(1 + b_{K_L+1})),  gamma = (K_L - 1)/N,
// where C_{K_L} = sum_{k <= K_L} a_k^2 / (1 + b_k) is the capacity of the kept eigentasks.
double delta_Eg_approximation(const SpectrumModel& model, double samples, double shots, std::size_t kept);

// Smallest K_L with beta_{K_L}^2 / S >= (N - K_L) / (K - C_T(S)), searched over
// 1..min(len(beta_sq), N); min(len(beta_sq), N) if there is no crossing.
// `total_count` is K. Requires ascending beta_sq.
std::size_t optimal_truncation(std::span<const double> beta_sq, std::size_t samples, double shots,
                               std::size_t total_count);

// Spectrum file: "# qrc-spectrum v1", "# residual_power=<x>", "# total_count=<K>",
// then "k,beta_sq,a" rows with k starting at 1.
void write_spectrum_csv(std::ostream& out, const SpectrumModel& model);
SpectrumModel read_spectrum_csv(std::istream& in);

}  // namespace qrc
