#include <cmath>
#include <sstream>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "qrc/eigentask.hpp"
#include "qrc/error.hpp"
#include "qrc/reservoir.hpp"

using namespace qrc;

namespace {

const Reservoir& reservoir(int qubits) {
  static const Reservoir two = [] {
    ReservoirSpec s;
    s.qubits = 2;
    return build_reservoir(s);
  }();
  static const Reservoir four = build_reservoir(ReservoirSpec{});
  return qubits == 2 ? two : four;
}

FeatureVector toy(double u) {
  const double p = 0.5 * (1.0 + u);
  return FeatureVector{Eigen::Vector2d(p, 1.0 - p)};
}

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("constant feature map") {
  const Eigen::Vector3d x0(0.2, 0.3, 0.5);
  QuadratureSpec spec;
  spec.nodes = 16;
  const MomentSet m = compute_moments([&](double) { return FeatureVector{x0}; }, {}, spec);
  CHECK(max_abs(m.gram - x0 * x0.transpose()) < 1e-15);
  CHECK(max_abs(m.mean - x0) < 1e-15);
  Eigen::Matrix3d v = -x0 * x0.transpose();
  v.diagonal() += x0;
  CHECK(max_abs(m.noise - v) < 1e-15);

  // Only the constant eigentask survives a rank-one Gram matrix.
  const EigentaskBasis basis = solve_eigentasks(m);
  CHECK(basis.effective_rank() == 1);
  CHECK(basis.beta_sq(0) < 1e-14);
}

TEST_CASE("noise matrix identity V = diag(d) - G") {
  for (int q : {2, 4}) {
    const MomentSet m = compute_moments(reservoir(q), {}, {});
    CHECK(m.identity_residual < 1e-10);
    Eigen::MatrixXd v = -m.gram;
    v.diagonal() += m.mean;
    CHECK(max_abs(m.noise - v) < 1e-10);
    CHECK(max_abs(m.gram - m.gram.transpose()) == 0.0);
  }
}

TEST_CASE("quadrature moments against a fine midpoint grid") {
  const MomentSet m = compute_moments(reservoir(2), {}, {});
  const oracle::Moments ref =
      oracle::riemann_moments([](double u) { return reservoir(2).features(u).values; }, -1.0, 1.0, 100000);
  CHECK(max_abs(m.gram - ref.gram) < 1e-6);
  CHECK(max_abs(m.noise - ref.noise) < 1e-6);
  CHECK(max_abs(m.mean - ref.mean) < 1e-6);
}

TEST_CASE("512 and 1024 nodes agree on the 4-qubit reservoir") {
  QuadratureSpec spec;
  spec.check_convergence = false;
  const MomentSet a = compute_moments(reservoir(4), {}, spec);
  spec.nodes = 1024;
  const MomentSet b = compute_moments(reservoir(4), {}, spec);
  CHECK(max_abs(a.gram - b.gram) < 1e-9);
}

TEST_CASE("convergence check fails loudly on a coarse rule") {
  QuadratureSpec spec;
  spec.nodes = 4;
  CHECK_THROWS_AS(compute_moments(reservoir(4), {}, spec), NumericalError);
}

TEST_CASE("toy two-outcome map: hand-computed spectrum") {
  QuadratureSpec spec;
  spec.nodes = 8;
  const MomentSet m = compute_moments(toy, {}, spec);
  // p uniform on [0, 1]: E p^2 = 1/3, E p(1-p) = 1/6.
  Eigen::Matrix2d g, v;
  g << 1.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3;
  v << 1.0 / 6, -1.0 / 6, -1.0 / 6, 1.0 / 6;
  CHECK(max_abs(m.gram - g) < 1e-15);
  CHECK(max_abs(m.noise - v) < 1e-15);

  const std::vector<double> roots = oracle::generalized_eigenvalues_2x2(g, v);
  CHECK(roots[0] == doctest::Approx(0.0));
  CHECK(roots[1] == doctest::Approx(2.0));

  const EigentaskBasis basis = solve_eigentasks(m);
  REQUIRE(basis.effective_rank() == 2);
  CHECK(basis.beta_sq(0) == doctest::Approx(roots[0]).epsilon(1e-12));
  CHECK(basis.beta_sq(1) == doctest::Approx(roots[1]).epsilon(1e-12));
  // y2 is proportional to p - (1 - p) = u; unit norm gives sqrt(3) u.
  CHECK(std::abs(basis.combinations(0, 1) + basis.combinations(1, 1)) < 1e-12);
  CHECK(std::abs(basis.combinations(0, 1)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("eigentask basis of the 4-qubit reservoir") {
  const MomentSet m = compute_moments(reservoir(4), {}, {});
  const EigentaskBasis basis = solve_eigentasks(m);
  const Eigen::MatrixXd& r = basis.combinations;
  const auto k = static_cast<Eigen::Index>(basis.effective_rank());
  REQUIRE(k >= 2);
  CHECK(basis.dimension() == 16);

  CHECK(std::abs(basis.beta_sq(0)) < 1e-10);
  const Eigen::VectorXd r1 = r.col(0);
  CHECK(max_abs(r1 / r1.mean() - Eigen::VectorXd::Ones(16)) < 1e-12);
  for (Eigen::Index i = 1; i < k; ++i) CHECK(basis.beta_sq(i) >= basis.beta_sq(i - 1));

  CHECK(max_abs(r.transpose() * m.gram * r - Eigen::MatrixXd::Identity(k, k)) < 1e-8);
  CHECK(max_abs(r.transpose() * m.noise * r - Eigen::MatrixXd(basis.beta_sq.asDiagonal())) < 1e-8);

  // y1 = 1 pointwise
  for (double u : {-0.8, 0.1, 0.9}) CHECK(basis.eigentasks(reservoir(4).features(u).values)(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reparametrizing the features leaves the spectrum unchanged") {
  // x' = A x with A invertible; V and G transform congruently, the unit vector
  // with the inverse transpose.
  const MomentSet m = compute_moments(reservoir(2), {}, {});
  Eigen::Matrix4d a;
  a << 2, 1, 0, 0, 0, 1, 0, 1, 1, 0, 3, 0, 0, 0, 1, 1;
  MomentSet t = m;
  t.gram = a * m.gram * a.transpose();
  t.noise = a * m.noise * a.transpose();
  t.unit = a.transpose().inverse() * m.unit;
  const EigentaskBasis b0 = solve_eigentasks(m);
  const EigentaskBasis b1 = solve_eigentasks(t);
  REQUIRE(b0.effective_rank() == b1.effective_rank());
  for (Eigen::Index i = 0; i < b0.beta_sq.size(); ++i)
    CHECK(std::abs(b1.beta_sq(i) - b0.beta_sq(i)) <= 1e-8 * std::max(1.0, b0.beta_sq(i)));
}

TEST_CASE("degenerate Gram matrix is rejected") {
  MomentSet m;
  m.gram = Eigen::MatrixXd::Zero(3, 3);
  m.noise = Eigen::MatrixXd::Zero(3, 3);
  m.mean = Eigen::VectorXd::Zero(3);
  m.unit = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(solve_eigentasks(m), NumericalError);
  m.unit = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(solve_eigentasks(m), ValidationError);
}

TEST_CASE("target equal to an eigentask decomposes onto it") {
  const MomentSet m = compute_moments(reservoir(4), {}, {});
  const EigentaskBasis basis = solve_eigentasks(m);
  const Eigen::VectorXd r2 = basis.combinations.col(1);
  const Target y2("y2", [r2](double u) { return r2.dot(reservoir(4).features(u).values); });
  QuadratureSpec spec;
  spec.breakpoints.clear();
  const TargetDecomposition d = decompose_target(y2, reservoir(4), basis, {}, spec);
  CHECK(d.scale == doctest::Approx(1.0).epsilon(1e-9));
  Eigen::VectorXd e2 = Eigen::VectorXd::Zero(basis.beta_sq.size());
  e2(1) = 1.0;
  CHECK(max_abs(d.eigentask_coefficients - e2) < 1e-8);
  CHECK(d.residual_power < 1e-8);
  CHECK(std::abs(d.residual_power_direct) < 1e-8);
}

TEST_CASE("Sgn target: unit power and Parseval") {
  const MomentSet m = compute_moments(reservoir(4), {}, {});
  const EigentaskBasis basis = solve_eigentasks(m);
  const TargetDecomposition d = decompose_target(Target::sgn(), reservoir(4), basis, {}, {});
  CHECK(d.raw_power == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.scale == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.eigentask_coefficients.squaredNorm() + d.residual_power == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.residual_power - d.residual_power_direct) < 1e-8);
  // Sgn is odd and y1 is constant.
  CHECK(std::abs(d.eigentask_coefficients(0)) < 1e-12);
  CHECK(max_abs(basis.combinations * d.eigentask_coefficients - d.feature_coefficients) < 1e-12);
}

TEST_CASE("scaled targets are normalized") {
  const MomentSet m = compute_moments(reservoir(2), {}, {});
  const EigentaskBasis basis = solve_eigentasks(m);
  const TargetDecomposition d = decompose_target(Target::sgn().scaled(3.0), reservoir(2), basis, {}, {});
  CHECK(d.raw_power == doctest::Approx(9.0));
  CHECK(d.scale == doctest::Approx(1.0 / 3.0));
  const Target zero("zero", [](double) { return 0.0; });
  CHECK_THROWS_AS(decompose_target(zero, reservoir(2), basis, {}, {}), ValidationError);
}

TEST_CASE("capacities") {
  const Eigen::Vector3d beta(0.0, 10.0, 1000.0);
  const Eigen::Vector3d a(0.0, 0.6, 0.8);
  const Capacities big = capacities(a, beta, 1e15);
  CHECK(big.functional == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(big.resolvable == doctest::Approx(3.0).epsilon(1e-11));
  const Capacities c = capacities(a, beta, 100.0);
  CHECK(c.functional == doctest::Approx(0.36 / 1.1 + 0.64 / 11.0));
  CHECK(c.resolvable == doctest::Approx(1.0 + 1.0 / 1.1 + 1.0 / 11.0));
  CHECK(capacities(Eigen::VectorXd{}, Eigen::VectorXd::Zero(5), 3.0).resolvable == doctest::Approx(5.0));
  CHECK(capacities(Eigen::Vector3d(1, 0, 0), beta, 1.0).functional == doctest::Approx(1.0));
  CHECK_THROWS_AS(capacities(a, beta, 0.5), ValidationError);
}

TEST_CASE("basis CSV round trip") {
  const MomentSet m = compute_moments(reservoir(2), {}, {});
  const EigentaskBasis basis = solve_eigentasks(m);
  std::stringstream buf;
  write_basis_csv(buf, basis);
  const EigentaskBasis back = read_basis_csv(buf, basis.beta_sq);
  CHECK(max_abs(back.combinations - basis.combinations) == 0.0);
  std::stringstream json;
  write_moments_json(json, m);
  CHECK(json.str().find("\"qrc-moments v1\"") != std::string::npos);
}
