#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qrc/error.hpp"
#include "qrc/quadrature.hpp"

using namespace qrc;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 3, 5, 8, 33}) {
    const QuadratureRule r = gauss_legendre(n, -0.5, 2.0);
    REQUIRE(r.size() == static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double q = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) q += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = (std::pow(2.0, p + 1) - std::pow(-0.5, p + 1)) / (p + 1);
      CHECK(q == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("Gauss-Legendre nodes are sorted and inside the interval") {
  const QuadratureRule r = gauss_legendre(512, -1.0, 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r.nodes[i] > -1.0);
    CHECK(r.nodes[i] < 1.0);
    CHECK(r.weights[i] > 0.0);
    if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
  }
  double q = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) q += r.weights[i] * std::cos(7.0 * r.nodes[i]);
  CHECK(q == doctest::Approx(2.0 * std::sin(7.0) / 7.0).epsilon(1e-13));
}

TEST_CASE("expectation rule includes the density and splits at breakpoints") {
  QuadratureSpec spec;
  spec.nodes = 64;
  const QuadratureRule r = expectation_rule({-1.0, 1.0}, spec);
  double total = 0.0, sign = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    total += r.weights[i];
    sign += r.weights[i] * (r.nodes[i] >= 0.0 ? 1.0 : -1.0);
    CHECK(r.nodes[i] != 0.0);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // A jump at a panel boundary is integrated exactly.
  CHECK(std::abs(sign) < 1e-14);

  spec.breakpoints = {5.0};  // outside: ignored
  const QuadratureRule single = expectation_rule({-1.0, 1.0}, spec);
  CHECK(single.size() == 64);
}

TEST_CASE("expectation rule on a shifted interval") {
  QuadratureSpec spec;
  spec.nodes = 40;
  spec.breakpoints = {0.5};
  const QuadratureRule r = expectation_rule({0.0, 2.0}, spec);
  double mean = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) mean += r.weights[i] * r.nodes[i];
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("invalid quadrature requests") {
  CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), ValidationError);
  InputDistribution bad{1.0, -1.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
