#pragma once

#include <vector>

#include "qrc/task.hpp"

namespace qrc {

struct QuadratureSpec {
  int nodes = 512;
  // Panel boundaries inside the input interval; the Sgn jump sits at 0.
  std::vector<double> breakpoints{0.0};
  // Convergence check: G from `nodes` and 2*`nodes` must agree to this (max-abs).
  bool check_convergence = true;
  double convergence_tolerance = 1e-9;
};

// Nodes and weights for E_u[f] = sum_i weights[i] * f(nodes[i]); the weights
// already include the input density.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

// n-point Gauss-Legendre rule for the plain integral over [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre rule for expectations under `dist`, split at the
// breakpoints that fall strictly inside the interval. Nodes are shared evenly
// between panels (the remainder goes to the leading panels).
QuadratureRule expectation_rule(const InputDistribution& dist, const QuadratureSpec& spec);

}  // namespace qrc
