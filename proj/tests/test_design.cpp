#include <doctest.h>

#include <cmath>

#include "cirisk/design.hpp"
#include "cirisk/errors.hpp"

using namespace cirisk;

namespace {

// 3 x 2 design with hand-computable geometry:
// X'X = [[2,1],[1,2]], (X'X)^-1 = (1/3) [[2,-1],[-1,2]]
DesignProblem tiny_problem() {
  DesignProblem dp;
  dp.X.resize(3, 2);
  dp.X << 1, 0, 0, 1, 1, 1;
  dp.a.resize(2);
  dp.a << 1, 0;
  dp.c.resize(2);
  dp.c << 0, 1;
  return dp;
}

Eigen::MatrixXd seeded_design(int n, int p) {
  Eigen::MatrixXd X(n, p);
  // deterministic pseudo-data; no external RNG needed for a fixture
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      X(i, j) = std::sin(1.3 * (i + 1) * (j + 2)) + (j == 0 ? 1.0 : 0.0);
  return X;
}

}  // namespace

TEST_CASE("geometry matches the hand-computed inverse") {
  const Geometry g = compute_geometry(tiny_problem());
  CHECK(g.m == 1);
  CHECK(std::abs(g.v11 - 2.0 / 3.0) < 1e-14);
  CHECK(std::abs(g.v22 - 2.0 / 3.0) < 1e-14);
  CHECK(std::abs(g.v12 - (-1.0 / 3.0)) < 1e-14);
  CHECK(std::abs(g.rho - (-0.5)) < 1e-14);
}

TEST_CASE("geometry agrees with a direct normal-equation inverse") {
  const Eigen::MatrixXd X = seeded_design(23, 4);
  Eigen::VectorXd a(4), c(4);
  a << 1, -2, 0.5, 0;
  c << 0, 1, 1, -1;
  const Geometry g = compute_geometry(X, a, c);
  const Eigen::MatrixXd M = (X.transpose() * X).inverse();
  CHECK(std::abs(g.v11 - a.dot(M * a)) < 1e-12);
  CHECK(std::abs(g.v22 - c.dot(M * c)) < 1e-12);
  CHECK(std::abs(g.v12 - a.dot(M * c)) < 1e-12);
  CHECK(std::abs(g.rho) < 1.0);
  CHECK(g.m == 19);
}

TEST_CASE("degenerate inputs are rejected with typed errors") {
  DesignProblem dp = tiny_problem();

  SUBCASE("rank deficiency") {
    dp.X.col(1) = 2.0 * dp.X.col(0);
    CHECK_THROWS_AS(compute_geometry(dp), RankError);
  }
  SUBCASE("no residual degrees of freedom") {
    dp.X.conservativeResize(2, 2);
    CHECK_THROWS_AS(compute_geometry(dp), DimensionError);
  }
  SUBCASE("contrast length mismatch") {
    dp.a.resize(3);
    dp.a << 1, 0, 0;
    CHECK_THROWS_AS(compute_geometry(dp), DimensionError);
  }
  SUBCASE("proportional contrasts have |rho| = 1") {
    dp.c = -3.0 * dp.a;
    CHECK_THROWS_AS(compute_geometry(dp), GeometryError);
  }
  SUBCASE("zero contrast") {
    dp.a.setZero();
    CHECK_THROWS_AS(compute_geometry(dp), GeometryError);
  }
  SUBCASE("non-finite design entry") {
    dp.X(0, 0) = std::nan("");
    CHECK_THROWS_AS(compute_geometry(dp), InputError);
  }
}

TEST_CASE("least squares recovers exact coefficients and orthogonal residuals") {
  const Eigen::MatrixXd X = seeded_design(23, 4);
  Eigen::VectorXd beta(4);
  beta << 2.0, -1.0, 0.25, 3.0;

  SUBCASE("noiseless data reproduces beta") {
    const LeastSquaresFit fit = fit_least_squares(X, X * beta);
    CHECK((fit.beta - beta).norm() < 1e-12);
    CHECK(fit.rss < 1e-20);
    CHECK(fit.m == 19);
  }
  SUBCASE("residuals are orthogonal to the column space") {
    Eigen::VectorXd y = X * beta;
    for (int i = 0; i < y.size(); ++i) y[i] += std::cos(7.0 * (i + 1));
    const LeastSquaresFit fit = fit_least_squares(X, y);
    const Eigen::VectorXd resid = y - X * fit.beta;
    CHECK((X.transpose() * resid).norm() < 1e-10);
    CHECK(std::abs(fit.sigma_hat * fit.sigma_hat * fit.m - fit.rss) < 1e-12);
  }
  SUBCASE("response length mismatch") {
    CHECK_THROWS_AS(fit_least_squares(X, Eigen::VectorXd::Zero(5)),
                    DimensionError);
  }
}

TEST_CASE("sufficient statistics assemble the standardized pre-test statistic") {
  DesignProblem dp = tiny_problem();
  Eigen::VectorXd y(3);
  y << 1.0, 2.0, 4.5;
  const Geometry g = compute_geometry(dp);
  const LeastSquaresFit fit = fit_least_squares(dp.X, y);
  const SufficientStats st = sufficient_stats(dp, y);
  CHECK(st.m == 1);
  CHECK(std::abs(st.theta_hat - dp.a.dot(fit.beta)) < 1e-14);
  CHECK(std::abs(st.tau_hat - dp.c.dot(fit.beta)) < 1e-14);
  CHECK(std::abs(st.sigma_hat - fit.sigma_hat) < 1e-14);
  CHECK(std::abs(st.x_stat -
                 st.tau_hat / (st.sigma_hat * std::sqrt(g.v22))) < 1e-12);
}

TEST_CASE("interpolating data cannot produce a scale estimate") {
  DesignProblem dp = tiny_problem();
  const Eigen::VectorXd y = dp.X * Eigen::Vector2d(1.0, 2.0);
  CHECK_THROWS_AS(sufficient_stats(dp, y), DegenerateDataError);
}
