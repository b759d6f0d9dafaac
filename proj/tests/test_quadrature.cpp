#include <doctest.h>

#include <cmath>
#include <vector>

#include "cirisk/errors.hpp"
#include "cirisk/quadrature.hpp"

using namespace cirisk;

namespace {

double poly_moment(int k) { return k % 2 == 0 ? 2.0 / (k + 1) : 0.0; }

}  // namespace

TEST_CASE("gauss-legendre rules are symmetric and exact to degree 2n-1") {
  for (int n : {2, 5, 20, 40, 64}) {
    const GaussLegendreRule& rule = gauss_legendre(n);
    REQUIRE(rule.nodes.size() == static_cast<size_t>(n));
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      wsum += rule.weights[static_cast<size_t>(i)];
      CHECK(rule.nodes[static_cast<size_t>(i)] ==
            -rule.nodes[static_cast<size_t>(n - 1 - i)]);
      if (i > 0)
        CHECK(rule.nodes[static_cast<size_t>(i)] >
              rule.nodes[static_cast<size_t>(i - 1)]);
    }
    CHECK(std::abs(wsum - 2.0) < 1e-14);
    // exactness on the hardest monomial the rule must integrate
    const int k = 2 * n - 2;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += rule.weights[static_cast<size_t>(i)] *
             std::pow(rule.nodes[static_cast<size_t>(i)], k);
    CHECK(std::abs(acc - poly_moment(k)) < 1e-13);
  }
}

TEST_CASE("make_panels splits at breakpoints and honours the width cap") {
  const std::vector<double> bp = {0.3, 2.0, 9.9};  // 9.9 outside, ignored
  const std::vector<double> edges = make_panels(0.0, 3.0, bp, 2);
  REQUIRE(edges.front() == 0.0);
  REQUIRE(edges.back() == 3.0);
  bool has_03 = false, has_20 = false;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    CHECK(edges[i + 1] - edges[i] <= 0.5 + 1e-12);
    if (std::abs(edges[i] - 0.3) < 1e-12) has_03 = true;
    if (std::abs(edges[i] - 2.0) < 1e-12) has_20 = true;
  }
  CHECK(has_03);
  CHECK(has_20);
  CHECK_THROWS_AS(make_panels(1.0, 1.0, {}, 2), InputError);
  CHECK_THROWS_AS(make_panels(2.0, 1.0, {}, 2), InputError);
}

TEST_CASE("integrate_1d reproduces classical integrals") {
  QuadratureSpec spec;
  SUBCASE("polynomial is exact") {
    const double v = integrate_1d([](double x) { return x * x; }, 0.0, 1.0, spec);
    CHECK(std::abs(v - 1.0 / 3.0) < 1e-15);
  }
  SUBCASE("sine over a period") {
    const double v =
        integrate_1d([](double x) { return std::sin(x); }, 0.0, M_PI, spec);
    CHECK(std::abs(v - 2.0) < 1e-12);
  }
  SUBCASE("runge function") {
    const double v = integrate_1d(
        [](double x) { return 1.0 / (1.0 + 25.0 * x * x); }, -1.0, 1.0, spec);
    CHECK(std::abs(v - 0.5493603067780064) < 1e-10);  // (2/5) atan 5
  }
  SUBCASE("orientation flips the sign") {
    const double fwd =
        integrate_1d([](double x) { return std::exp(x); }, 0.0, 2.0, spec);
    const double rev =
        integrate_1d([](double x) { return std::exp(x); }, 2.0, 0.0, spec);
    CHECK(fwd == -rev);
    CHECK(std::abs(fwd - (std::exp(2.0) - 1.0)) < 1e-12);
  }
}

TEST_CASE("declared breakpoints recover full accuracy across kinks") {
  QuadratureSpec spec;
  spec.abs_tol = 1e-12;
  auto kink = [](double x) { return std::abs(x - 0.3); };
  const std::vector<double> bp = {0.3};
  const double v = integrate_1d(kink, 0.0, 1.0, spec, bp);
  // exact: 0.3^2/2 + 0.7^2/2
  CHECK(std::abs(v - (0.045 + 0.245)) < 1e-14);
}

TEST_CASE("node-doubling verification raises on undeclared jumps") {
  QuadratureSpec spec;
  spec.abs_tol = 1e-12;
  spec.nodes_per_panel = 4;
  auto jump = [](double x) { return x < 0.377001 ? 0.0 : 1.0; };
  CHECK_THROWS_AS(integrate_1d(jump, 0.0, 1.0, spec), AccuracyError);
  // with verification off the (inaccurate) value is still returned
  const double v = integrate_1d(jump, 0.0, 1.0, spec.unverified());
  CHECK(std::abs(v - 0.622999) < 0.05);
}

TEST_CASE("non-finite integrand values are reported with the abscissa") {
  QuadratureSpec spec;
  auto bad = [](double x) { return x > 0.5 ? std::nan("") : 1.0; };
  CHECK_THROWS_AS(integrate_1d(bad, 0.0, 1.0, spec), EvaluationError);
}

TEST_CASE("integration is deterministic") {
  QuadratureSpec spec;
  auto f = [](double x) { return std::exp(-x * x) * std::cos(3.0 * x); };
  const double a = integrate_1d(f, -2.0, 2.0, spec);
  const double b = integrate_1d(f, -2.0, 2.0, spec);
  CHECK(a == b);
}

TEST_CASE("spec validation rejects nonsense") {
  QuadratureSpec spec;
  spec.panels_per_unit = 0;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = QuadratureSpec{};
  spec.abs_tol = 0.0;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = QuadratureSpec{};
  spec.nodes_per_panel = 1;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = QuadratureSpec{};
  spec.w_upper = -1.0;
  CHECK_THROWS_AS(spec.validate(), InputError);
}
