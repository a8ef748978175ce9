#include "qrc/replica.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "qrc/error.hpp"

namespace qrc {

namespace {

constexpr double kRelativeTolerance = 1e-12;
constexpr int kMaxBisection = 4000;

void check_common(double samples, double shots) {
  if (!(samples >= 1.0) || !std::isfinite(samples)) throw ValidationError("replica: N must be finite and >= 1");
  if (!(shots >= 1.0)) throw ValidationError("replica: S must be >= 1");
}

double scaled_nsr(double beta_sq, double shots) { return std::isfinite(shots) ? beta_sq / shots : 0.0; }

// (1 + b) / (N (1 + b) + kappa), written so b = +inf gives 1/N.
double capture_term(double b, double samples, double kappa) { return 1.0 / (samples + kappa / (1.0 + b)); }

// sum_{k>1} capture_term; pure-noise directions contribute exactly 1/N each.
double capture_sum(std::span<const double> beta_sq, double samples, double shots, double kappa) {
  double total = 0.0;
  for (std::size_t k = 1; k < beta_sq.size(); ++k) total += capture_term(scaled_nsr(beta_sq[k], shots), samples, kappa);
  return total;
}

// ((b + q)^2 + b) / (1 + b + q)^2 with q = kappa / N, stable for large b.
double error_share(double b, double q) {
  if (std::isinf(b)) return 1.0;
  const double t = 1.0 / (1.0 + b + q);
  const double r = (b + q) * t;
  return r * r + b * t * t;
}

// 1 - 1/(1 + b) ; equals b / (1 + b) and is 1 for b = +inf.
double noise_fraction(double b) { return 1.0 - 1.0 / (1.0 + b); }

}  // namespace

void SpectrumModel::validate() const {
  if (beta_sq.empty()) throw ValidationError("spectrum: empty beta_sq");
  if (!coefficients.empty() && coefficients.size() != beta_sq.size()) {
    throw ValidationError("spectrum: coefficient count differs from beta_sq count");
  }
  if (total_count < beta_sq.size()) throw ValidationError("spectrum: total_count below the number of eigentasks");
  if (std::abs(beta_sq.front()) > 1e-10) throw ValidationError("spectrum: beta_1^2 must be 0 (constant eigentask)");
  for (std::size_t k = 0; k < beta_sq.size(); ++k) {
    if (!(beta_sq[k] >= 0.0)) throw ValidationError("spectrum: beta^2 must be >= 0");
    if (k > 0 && beta_sq[k] < beta_sq[k - 1]) throw ValidationError("spectrum: beta^2 must be ascending");
  }
  if (!(residual_power >= 0.0)) throw ValidationError("spectrum: residual power must be >= 0");
  double power = residual_power;
  for (double a : coefficients) power += a * a;
  if (!coefficients.empty() && std::abs(power - 1.0) > 1e-8) {
    throw ValidationError(fmt::format("spectrum: |a|^2 + E[f_perp^2] = {:.12g}, expected 1", power));
  }
}

std::vector<double> SpectrumModel::padded_beta_sq() const {
  std::vector<double> padded = beta_sq;
  padded.resize(std::max(total_count, beta_sq.size()), std::numeric_limits<double>::infinity());
  return padded;
}

SpectrumModel SpectrumModel::from_basis(const EigentaskBasis& basis, const TargetDecomposition& target) {
  SpectrumModel model;
  model.beta_sq.assign(basis.beta_sq.data(), basis.beta_sq.data() + basis.beta_sq.size());
  model.coefficients.assign(target.eigentask_coefficients.data(),
                            target.eigentask_coefficients.data() + target.eigentask_coefficients.size());
  model.residual_power = target.residual_power;
  model.total_count = basis.dimension();
  return model;
}

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::Interpolation: return "interpolation";
    case Regime::Boundary: return "boundary";
    case Regime::Learning: return "learning";
  }
  return "unknown";
}

Regime classify_regime(double samples, std::size_t total_count) {
  const double threshold = static_cast<double>(total_count) - 1.0;
  if (samples < threshold) return Regime::Interpolation;
  if (samples == threshold) return Regime::Boundary;
  return Regime::Learning;
}

double solve_kappa(std::span<const double> beta_sq, double samples, double shots, double lambda) {
  check_common(samples, shots);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("solve_kappa: lambda must be finite and >= 0");
  if (beta_sq.empty()) throw ValidationError("solve_kappa: empty spectrum");

  const double terms = static_cast<double>(beta_sq.size() - 1);
  if (lambda == 0.0 && samples >= terms) return 0.0;

  // kappa > 0 solves h(kappa) = 1 - lambda/kappa - sum(kappa) = 0; h is strictly
  // increasing, negative near 0 and positive at the upper bracket below.
  double finite_mass = lambda;
  double silent = 0.0;
  for (std::size_t k = 1; k < beta_sq.size(); ++k) {
    const double b = scaled_nsr(beta_sq[k], shots);
    if (std::isinf(b)) {
      silent += 1.0;
    } else {
      finite_mass += 1.0 + b;
    }
  }
  if (silent >= samples) {
    throw NumericalError(fmt::format("solve_kappa: {} pure-noise eigentasks with N = {} leave no finite root", silent, samples));
  }
  const auto h = [&](double kappa) { return 1.0 - lambda / kappa - capture_sum(beta_sq, samples, shots, kappa); };

  double lo = 0.0;
  double hi = finite_mass / (1.0 - silent / samples);
  if (!(hi > 0.0) || !(h(hi) >= 0.0)) throw NumericalError("solve_kappa: no sign change in the bracket");
  for (int iter = 0; iter < kMaxBisection && hi - lo > kRelativeTolerance * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double overfitting_factor(std::span<const double> beta_sq, double samples, double shots, double kappa) {
  double gamma = 0.0;
  for (std::size_t k = 1; k < beta_sq.size(); ++k) {
    const double b = scaled_nsr(beta_sq[k], shots);
    const double denom = samples + kappa / (1.0 + b);
    gamma += samples / (denom * denom);
  }
  return gamma;
}

ReplicaPrediction predict_errors(const SpectrumModel& model, double samples, double shots, double lambda) {
  model.validate();
  const std::vector<double> beta = model.padded_beta_sq();

  ReplicaPrediction p;
  p.regime = classify_regime(samples, beta.size());
  p.kappa = solve_kappa(beta, samples, shots, lambda);
  p.gamma = overfitting_factor(beta, samples, shots, p.kappa);
  if (!(p.gamma < 1.0)) {
    throw DivergentPrediction(fmt::format("replica: gamma = {:.6g} >= 1 at N = {} (interpolation threshold)", p.gamma, samples));
  }

  const double q = p.kappa / samples;
  double bracket = model.residual_power;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double a = model.coefficient(k);
    if (a != 0.0) bracket += a * a * error_share(scaled_nsr(beta[k], shots), q);
  }
  p.generalization_error = bracket / (1.0 - p.gamma);
  if (p.kappa > 0.0) {
    const double ratio = lambda / p.kappa;
    p.training_error = ratio * ratio * p.generalization_error;
  } else {
    p.training_error = (1.0 - p.gamma) * (1.0 - p.gamma) * p.generalization_error;
  }
  return p;
}

TruncatedPrediction predict_truncated(const SpectrumModel& model, double samples, double shots, std::size_t kept) {
  model.validate();
  check_common(samples, shots);
  const std::vector<double> beta = model.padded_beta_sq();
  if (kept < 1 || kept > beta.size()) throw ValidationError(fmt::format("predict_truncated: K_L = {} out of range", kept));

  TruncatedPrediction t;
  t.kept = kept;
  t.gamma = (static_cast<double>(kept) - 1.0) / samples;
  if (!(static_cast<double>(kept) - 1.0 < samples)) {
    t.divergent = true;
    t.generalization_error = std::numeric_limits<double>::infinity();
    return t;
  }
  double bracket = model.residual_power;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    const double a = model.coefficient(k);
    if (a == 0.0) continue;
    bracket += k < kept ? a * a * noise_fraction(scaled_nsr(beta[k], shots)) : a * a;
  }
  t.generalization_error = bracket / (1.0 - t.gamma);
  return t;
}

double delta_Eg(const SpectrumModel& model, double samples, double shots, std::size_t kept) {
  const TruncatedPrediction lower = predict_truncated(model, samples, shots, kept);
  const TruncatedPrediction upper = predict_truncated(model, samples, shots, kept + 1);
  if (lower.divergent || upper.divergent) {
    throw DivergentPrediction(fmt::format("delta_Eg: K_L = {} or {} is in the interpolation regime", kept, kept + 1));
  }
  return upper.generalization_error - lower.generalization_error;
}

double delta_Eg_approximation(const SpectrumModel& model, double samples, double shots, std::size_t kept) {
  model.validate();
  check_common(samples, shots);
  const std::vector<double> beta = model.padded_beta_sq();
  if (kept < 1 || kept >= beta.size()) throw ValidationError("delta_Eg_approximation: K_L out of range");
  const double gamma = (static_cast<double>(kept) - 1.0) / samples;
  // Capacity of the kept eigentasks: the large-N limit of the truncated model.
  double capacity = 0.0;
  for (std::size_t k = 0; k < kept; ++k) {
    const double a = model.coefficient(k);
    capacity += a * a * (1.0 - noise_fraction(scaled_nsr(beta[k], shots)));
  }
  const double next_a = model.coefficient(kept);
  const double next_b = scaled_nsr(beta[kept], shots);
  return (1.0 - capacity) / (samples * (1.0 - gamma) * (1.0 - gamma)) -
         next_a * next_a * (1.0 - noise_fraction(next_b)) / (1.0 - gamma);
}

std::size_t optimal_truncation(std::span<const double> beta_sq, std::size_t samples, double shots,
                               std::size_t total_count) {
  if (beta_sq.empty()) throw ValidationError("optimal_truncation: empty spectrum");
  if (samples < 1) throw ValidationError("optimal_truncation: N must be >= 1");
  if (!(shots >= 1.0)) throw ValidationError("optimal_truncation: S must be >= 1");
  if (total_count < beta_sq.size()) throw ValidationError("optimal_truncation: K below the number of eigentasks");

  double resolvable = 0.0;
  for (double b : beta_sq) resolvable += 1.0 / (1.0 + scaled_nsr(b, shots));
  const double spare = static_cast<double>(total_count) - resolvable;
  const std::size_t limit = std::min(beta_sq.size(), samples);

  // beta_k^2 / S * (K - C_T) >= N - k : false then true along k (ascending LHS,
  // descending RHS), so the first true index is found by binary search.
  const auto crossed = [&](std::size_t k) {
    return scaled_nsr(beta_sq[k - 1], shots) * spare >= static_cast<double>(samples) - static_cast<double>(k);
  };
  std::size_t lo = 1, hi = limit + 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (crossed(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo <= limit ? lo : limit;
}

void write_spectrum_csv(std::ostream& out, const SpectrumModel& model) {
  out << "# qrc-spectrum v1\n";
  out << fmt::format("# residual_power={:.17g}\n", model.residual_power);
  out << "# total_count=" << model.total_count << '\n';
  out << "k,beta_sq,a\n";
  for (std::size_t k = 0; k < model.beta_sq.size(); ++k) {
    out << k + 1 << ',' << fmt::format("{:.17g}", model.beta_sq[k]) << ',' << fmt::format("{:.17g}", model.coefficient(k)) << '\n';
  }
}

SpectrumModel read_spectrum_csv(std::istream& in) {
  SpectrumModel model;
  std::string line;
  bool has_coefficients = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (auto pos = line.find("residual_power="); pos != std::string::npos) model.residual_power = std::stod(line.substr(pos + 15));
      if (auto pos = line.find("total_count="); pos != std::string::npos) model.total_count = std::stoul(line.substr(pos + 12));
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
    if (fields.size() < 2) throw ValidationError("spectrum csv: need at least k,beta_sq columns");
    if (fields[0] == "k") {
      has_coefficients = fields.size() >= 3;
      continue;
    }
    const std::size_t k = std::stoul(fields[0]);
    if (k != model.beta_sq.size() + 1) throw ValidationError("spectrum csv: k must run 1, 2, ... in order");
    model.beta_sq.push_back(std::stod(fields[1]));
    if (has_coefficients) {
      if (fields.size() < 3) throw ValidationError("spectrum csv: missing a column");
      model.coefficients.push_back(std::stod(fields[2]));
    }
  }
  if (model.total_count == 0) model.total_count = model.beta_sq.size();
  model.validate();
  return model;
}

}  // namespace qrc
