#include "qrc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qrc/error.hpp"

namespace qrc {

namespace {

struct LegendreValue {
  double value;
  double derivative;
};

// P_n(z) by the three-term recurrence, and P_n'(z) from P_n and P_{n-1}.
LegendreValue legendre(int n, double z) {
  double p0 = 1.0, p1 = z;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double derivative = (n == 1) ? 1.0 : n * (z * p1 - p0) / (z * z - 1.0);
  return {p1, derivative};
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const LegendreValue p = legendre(n, z);
      const double step = p.value / p.derivative;
      z -= step;
      if (std::abs(step) < 1e-16) break;
    }
    const double dp = legendre(n, z).derivative;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[n - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  if (n % 2 == 1) {
    const double dp = legendre(n, 0.0).derivative;
    rule.nodes[n / 2] = mid;
    rule.weights[n / 2] = half * 2.0 / (dp * dp);
  }
  return rule;
}

QuadratureRule expectation_rule(const InputDistribution& dist, const QuadratureSpec& spec) {
  dist.validate();
  std::vector<double> edges{dist.lower};
  std::vector<double> inner;
  for (double b : spec.breakpoints) {
    if (b > dist.lower && b < dist.upper) inner.push_back(b);
  }
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  edges.insert(edges.end(), inner.begin(), inner.end());
  edges.push_back(dist.upper);

  const int panels = static_cast<int>(edges.size()) - 1;
  if (spec.nodes < panels) throw ValidationError("quadrature: fewer nodes than panels");

  QuadratureRule rule;
  const double density = dist.density();
  for (int p = 0; p < panels; ++p) {
    const int n = spec.nodes / panels + (p < spec.nodes % panels ? 1 : 0);
    const QuadratureRule panel = gauss_legendre(n, edges[p], edges[p + 1]);
    for (std::size_t i = 0; i < panel.size(); ++i) {
      rule.nodes.push_back(panel.nodes[i]);
      rule.weights.push_back(panel.weights[i] * density);
    }
  }
  return rule;
}

}  // namespace qrc
