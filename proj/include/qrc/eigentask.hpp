#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "qrc/quadrature.hpp"
#include "qrc/reservoir.hpp"
#include "qrc/task.hpp"

namespace qrc {

using FeatureMap = std::function<FeatureVector(double)>;

// Input-averaged moments of the noiseless features.
struct MomentSet {
  Eigen::MatrixXd gram;   // G = E_u[x x^T]
  Eigen::MatrixXd noise;  // V = E_u[diag(x) - x x^T]
  Eigen::VectorXd mean;   // d = E_u[x]
  // Combination r with r . x(u) == 1 for every u. All-ones for probability
  // features; transforms as A^{-1} 1 under x -> A^T x.
  Eigen::VectorXd unit;
  std::string rule = "gauss-legendre";
  int nodes = 0;
  // max |V - (diag(d) - G)|, recorded at assembly time.
  double identity_residual = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(gram.rows()); }
};

// Assembles G, V, d on a single quadrature rule. V is averaged from Sigma(u)
// node by node and then compared against diag(d) - G.
MomentSet moments_on_rule(const FeatureMap& map, const QuadratureRule& rule);

// Moments under `dist` with the composite Gauss-Legendre rule from `spec`. With
// spec.check_convergence, G is recomputed at twice the nodes and a max-abs change
// above spec.convergence_tolerance throws NumericalError.
MomentSet compute_moments(const FeatureMap& map, const InputDistribution& dist, const QuadratureSpec& spec);
MomentSet compute_moments(const Reservoir& reservoir, const InputDistribution& dist, const QuadratureSpec& spec);

// Eigen-NSRs and G-orthonormal combination vectors, ascending, with the constant
// eigentask (beta^2 = 0) pinned in column 0.
struct EigentaskBasis {
  Eigen::VectorXd beta_sq;       // K_eff values
  Eigen::MatrixXd combinations;  // K x K_eff, column k is r^(k)

  std::size_t dimension() const { return static_cast<std::size_t>(combinations.rows()); }
  std::size_t effective_rank() const { return static_cast<std::size_t>(combinations.cols()); }
  // y^(k)(u) = r^(k) . x(u) for all kept k.
  Eigen::VectorXd eigentasks(const Eigen::VectorXd& x) const { return combinations.transpose() * x; }
};

// Solves V r = beta^2 G r. The constant combination is split off exactly; on its
// G-orthogonal complement G is whitened by a symmetric eigendecomposition, and
// directions with eigenvalue below gram_threshold * lambda_max(G) are discarded.
EigentaskBasis solve_eigentasks(const MomentSet& moments, double gram_threshold = 1e-12);

struct TargetDecomposition {
  Eigen::VectorXd feature_coefficients;    // c = R a
  Eigen::VectorXd eigentask_coefficients;  // a_k = E_u[y^(k) f*]
  double residual_power = 0.0;             // E[f_perp^2] = 1 - |a|^2
  double residual_power_direct = 0.0;      // E[(f* - a . y)^2] by quadrature
  double raw_power = 0.0;                  // E_u[f*^2] before normalization
  double scale = 1.0;                      // normalized target is target.scaled(scale)
};

// Decomposes f* (rescaled so E_u[f*^2] = 1) on the eigentask basis using the
// same quadrature rule as the moments. Throws NumericalError if 1 - |a|^2 < -1e-8.
TargetDecomposition decompose_target(const Target& target, const FeatureMap& map, const EigentaskBasis& basis,
                                     const InputDistribution& dist, const QuadratureSpec& spec);
TargetDecomposition decompose_target(const Target& target, const Reservoir& reservoir, const EigentaskBasis& basis,
                                     const InputDistribution& dist, const QuadratureSpec& spec);

struct Capacities {
  double functional = 0.0;  // C[f*] = sum a_k^2 / (1 + beta_k^2 / S)
  double resolvable = 0.0;  // C_T(S) = sum 1 / (1 + beta_k^2 / S)
};

// `a` may be empty, in which case only C_T is meaningful. Infinite beta^2
// contributes nothing; S may be +inf.
Capacities capacities(const Eigen::VectorXd& a, const Eigen::VectorXd& beta_sq, double shots);

// Structured outputs: moments as JSON; spectrum as "k,beta_sq,a" CSV; basis as
// a K-row matrix CSV.
void write_moments_json(std::ostream& out, const MomentSet& moments);
void write_basis_csv(std::ostream& out, const EigentaskBasis& basis);
EigentaskBasis read_basis_csv(std::istream& in, const Eigen::VectorXd& beta_sq);

}  // namespace qrc
