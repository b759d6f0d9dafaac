#pragma once

#include <Eigen/Dense>

namespace cirisk {

// A regression design X (n x p, full column rank, n > p) together with the
// two contrasts of interest: theta = a'beta is the target of inference and
// tau = c'beta is the quantity suspected to be zero.
struct DesignProblem {
  Eigen::MatrixXd X;
  Eigen::VectorXd a;
  Eigen::VectorXd c;
};

// Scalars that determine the whole decision problem: v11 = a'(X'X)^-1 a,
// v22 = c'(X'X)^-1 c, v12 = a'(X'X)^-1 c, rho = v12 / sqrt(v11 v22),
// m = n - p residual degrees of freedom.
struct Geometry {
  double v11 = 0.0;
  double v22 = 0.0;
  double v12 = 0.0;
  double rho = 0.0;
  int m = 0;
};

struct LeastSquaresFit {
  Eigen::VectorXd beta;
  double rss = 0.0;
  double sigma_hat = 0.0;  // sqrt(rss / m)
  int m = 0;
};

// Everything the interval family needs from the data: the two contrast
// estimates, the scale estimate, and x_stat = tau_hat / (sigma_hat sqrt(v22)).
struct SufficientStats {
  double theta_hat = 0.0;
  double tau_hat = 0.0;
  double sigma_hat = 0.0;
  double x_stat = 0.0;
  int m = 0;
};

// Throws DimensionError / RankError / GeometryError on bad input.
Geometry compute_geometry(const Eigen::MatrixXd& X, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& c);
Geometry compute_geometry(const DesignProblem& dp);

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y);

// Throws DegenerateDataError when the residual scale estimate vanishes.
SufficientStats sufficient_stats(const DesignProblem& dp,
                                 const Eigen::VectorXd& y);

}  // namespace cirisk
