#include "cirisk/design.hpp"

#include <cmath>
#include <sstream>

#include "cirisk/errors.hpp"

namespace cirisk {

namespace {

void check_design(const Eigen::MatrixXd& X) {
  if (X.rows() < 1 || X.cols() < 1)
    throw DimensionError("design matrix is empty");
  if (X.rows() <= X.cols()) {
    std::ostringstream msg;
    msg << "need n > p for a residual scale estimate (n = " << X.rows()
        << ", p = " << X.cols() << ")";
    throw DimensionError(msg.str());
  }
  if (!X.allFinite()) throw InputError("design matrix has non-finite entries");
}

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full_rank_qr(
    const Eigen::MatrixXd& X) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    std::ostringstream msg;
    msg << "design matrix is rank deficient (rank " << qr.rank() << " < p = "
        << X.cols() << ")";
    throw RankError(msg.str());
  }
  return qr;
}

}  // namespace

Geometry compute_geometry(const Eigen::MatrixXd& X, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& c) {
  check_design(X);
  const Eigen::Index p = X.cols();
  if (a.size() != p || c.size() != p)
    throw DimensionError("contrast vectors must have length p");
  if (!a.allFinite() || !c.allFinite())
    throw InputError("contrast vectors have non-finite entries");
  if (a.norm() == 0.0 || c.norm() == 0.0)
    throw GeometryError("contrast vectors must be nonzero");

  const auto qr = full_rank_qr(X);
  // With X P = Q R,  a'(X'X)^-1 a = || R^-T P' a ||^2.
  const Eigen::MatrixXd R =
      qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::VectorXd ua =
      R.transpose().triangularView<Eigen::Lower>().solve(
          qr.colsPermutation().transpose() * a);
  const Eigen::VectorXd uc =
      R.transpose().triangularView<Eigen::Lower>().solve(
          qr.colsPermutation().transpose() * c);

  Geometry g;
  g.v11 = ua.squaredNorm();
  g.v22 = uc.squaredNorm();
  g.v12 = ua.dot(uc);
  g.m = static_cast<int>(X.rows() - p);
  if (!(g.v11 > 0.0) || !(g.v22 > 0.0))
    throw GeometryError("contrast variances must be positive");
  g.rho = g.v12 / std::sqrt(g.v11 * g.v22);
  if (std::abs(g.rho) >= 1.0 - 1e-12)
    throw GeometryError(
        "contrasts a and c are (numerically) linearly dependent: |rho| ~ 1");
  return g;
}

Geometry compute_geometry(const DesignProblem& dp) {
  return compute_geometry(dp.X, dp.a, dp.c);
}

LeastSquaresFit fit_least_squares(const Eigen::MatrixXd& X,
                                  const Eigen::VectorXd& y) {
  check_design(X);
  if (y.size() != X.rows())
    throw DimensionError("response length must equal the number of rows of X");
  if (!y.allFinite()) throw InputError("response has non-finite entries");

  const auto qr = full_rank_qr(X);
  LeastSquaresFit fit;
  fit.beta = qr.solve(y);
  fit.rss = (y - X * fit.beta).squaredNorm();
  fit.m = static_cast<int>(X.rows() - X.cols());
  fit.sigma_hat = std::sqrt(fit.rss / fit.m);
  return fit;
}

SufficientStats sufficient_stats(const DesignProblem& dp,
                                 const Eigen::VectorXd& y) {
  const Geometry g = compute_geometry(dp);
  const LeastSquaresFit fit = fit_least_squares(dp.X, y);
  SufficientStats st;
  st.theta_hat = dp.a.dot(fit.beta);
  st.tau_hat = dp.c.dot(fit.beta);
  st.sigma_hat = fit.sigma_hat;
  st.m = fit.m;
  if (!(fit.rss > 1e-28 * std::max(1.0, y.squaredNorm())))
    throw DegenerateDataError(
        "residual scale estimate is zero; the design interpolates the data");
  st.x_stat = st.tau_hat / (st.sigma_hat * std::sqrt(g.v22));
  return st;
}

}  // namespace cirisk
