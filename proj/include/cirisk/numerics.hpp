#pragma once

#include <functional>
#include <utility>

#include "cirisk/quadrature.hpp"

namespace cirisk {

// standard normal density / cdf / quantile
double phi(double x);
double normal_cdf(double x);
double normal_quantile(double p);

// P(x <= Z <= y) for Z ~ N(mu, v); requires x <= y and v > 0
double psi(double x, double y, double mu, double v);

// regularized incomplete beta I_x(a, b) and lower gamma P(a, x)
double inc_beta(double a, double b, double x);
double inc_gamma_p(double a, double x);

// two-sided critical values: P(|T_m| <= t) = 1 - alpha, P(|Z| <= z) = 1 - alpha
double t_quantile(int m, double alpha);
double z_quantile(double alpha);

// W = (residual scale estimate) / (true scale), W^2 ~ chi^2_m / m
double w_density(double w, int m);
double expected_w(int m);
double w_cdf(double w, int m);
std::pair<double, double> w_truncation_bounds(int m, double tail_mass);

// Distribution of the scale ratio W.  df() == 0 encodes the known-scale
// limit where W is a point mass at 1 and critical values are normal.
class WLaw {
 public:
  explicit WLaw(int m);
  static WLaw known_sigma() { return WLaw(); }

  bool sigma_known() const { return m_ == 0; }
  int df() const { return m_; }
  double critical(double alpha) const;  // t quantile, or z when sigma known
  double expected_w() const;
  double density(double w) const;
  std::pair<double, double> truncation_bounds(double tail_mass) const;

 private:
  WLaw() : m_(0) {}
  int m_;
};

// integral of f against the law of W over (0, inf); the range is truncated
// where the omitted probability mass is negligible against spec.abs_tol,
// and the known-scale case collapses to f(1)
double integrate_semi_infinite_w(const std::function<double(double)>& f,
                                 const WLaw& wlaw, const QuadratureSpec& spec);
double integrate_semi_infinite_w(const std::function<double(double)>& f,
                                 int m, const QuadratureSpec& spec);

}  // namespace cirisk
