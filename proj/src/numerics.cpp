#include "cirisk/numerics.hpp"

#include <cmath>
#include <limits>

#include "cirisk/errors.hpp"

namespace cirisk {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

// Hart (1968) algorithm 5666 rational approximation as tuned by West for
// the central region; deep tail by the Mills-ratio continued fraction
// evaluated backwards, which keeps the tail relatively accurate.
double cumnorm(double x) {
  const double xa = std::abs(x);
  double c;
  if (xa > 37.6) {
    c = 0.0;
  } else if (xa < 7.07106781186547) {
    const double e = std::exp(-xa * xa / 2.0);
    double b = 3.52624965998911e-02 * xa + 0.700383064443688;
    b = b * xa + 6.37396220353165;
    b = b * xa + 33.912866078383;
    b = b * xa + 112.079291497871;
    b = b * xa + 221.213596169931;
    b = b * xa + 220.206867912376;
    c = e * b;
    b = 8.83883476483184e-02 * xa + 1.75566716318264;
    b = b * xa + 16.064177579207;
    b = b * xa + 86.7807322029461;
    b = b * xa + 296.564248779674;
    b = b * xa + 637.333633378831;
    b = b * xa + 793.826512519948;
    b = b * xa + 440.413735824752;
    c = c / b;
  } else {
    double cf = 0.0;  // Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(...))))
    for (int k = 64; k >= 1; --k) cf = k / (xa + cf);
    c = kInvSqrt2Pi * std::exp(-0.5 * xa * xa) / (xa + cf);
  }
  return x > 0.0 ? 1.0 - c : c;
}

// Wichura's PPND16 (AS 241), |error| ~ 1e-16 before polishing.
double ppnd16(double p) {
  const double q = p - 0.5;
  double r, num, den;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
              1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
            1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
              5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
            4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
              3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
            4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
            2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
            5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  val = num / den;
  return q < 0.0 ? -val : val;
}

// Lentz evaluation of the incomplete-beta continued fraction.
double betacf(double a, double b, double x) {
  const int maxit = 500;
  const double eps = 3e-16, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= maxit; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw AccuracyError("incomplete beta continued fraction did not converge");
}

}  // namespace

double phi(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
  if (std::isnan(x)) throw InputError("normal_cdf: x is NaN");
  return cumnorm(x);
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw InputError("normal_quantile: p must lie in (0, 1)");
  double x = ppnd16(p);
  const double d = phi(x);
  if (d > 1e-280) x -= (cumnorm(x) - p) / d;  // one Newton polish
  return x;
}

double psi(double x, double y, double mu, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError("psi: v must be finite and > 0");
  if (!(x <= y)) throw InputError("psi: requires x <= y");
  if (!std::isfinite(mu)) throw InputError("psi: mu must be finite");
  const double sd = std::sqrt(v);
  double p = cumnorm((y - mu) / sd) - cumnorm((x - mu) / sd);
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return p;
}

double inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InputError("inc_beta: a and b must be > 0");
  if (!(x >= 0.0) || !(x <= 1.0)) throw InputError("inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(lbt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double inc_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw InputError("inc_gamma_p: a must be > 0");
  if (!(x >= 0.0)) throw InputError("inc_gamma_p: x must be >= 0");
  if (x == 0.0) return 0.0;
  const double lga = std::lgamma(a);
  const long max_iter = 2000000;
  if (x < a + 1.0) {
    // series for P(a, x)
    double ap = a, sum = 1.0 / a, del = sum;
    for (long n = 0; n < max_iter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-16)
        return sum * std::exp(-x + a * std::log(x) - lga);
    }
    throw AccuracyError("incomplete gamma series did not converge");
  }
  // Lentz continued fraction for Q(a, x)
  const double fpmin = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / fpmin, d = 1.0 / b, h = d;
  for (long i = 1; i <= max_iter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16)
      return 1.0 - std::exp(-x + a * std::log(x) - lga) * h;
  }
  throw AccuracyError("incomplete gamma continued fraction did not converge");
}

double t_quantile(int m, double alpha) {
  if (m < 1) throw InputError("t_quantile: degrees of freedom must be >= 1");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InputError("t_quantile: alpha must lie in (0, 1)");
  // P(|T_m| <= t) = 1 - I_{m/(m+t^2)}(m/2, 1/2); bisect the decreasing map
  const double md = static_cast<double>(m);
  auto two_sided_tail = [&](double t) {
    return inc_beta(md / 2.0, 0.5, md / (md + t * t));
  };
  double lo = 0.0, hi = 2.0;
  while (two_sided_tail(hi) > alpha) {
    hi *= 2.0;
    if (hi > 1e12) throw AccuracyError("t_quantile: bracket expansion failed");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (two_sided_tail(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  const double t = 0.5 * (lo + hi);
  if (std::abs(two_sided_tail(t) - alpha) > 1e-12)
    throw AccuracyError("t_quantile: probability-scale tolerance not met");
  return t;
}

double z_quantile(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InputError("z_quantile: alpha must lie in (0, 1)");
  return normal_quantile(1.0 - alpha / 2.0);
}

double w_density(double w, int m) {
  if (m < 1) throw InputError("w_density: degrees of freedom must be >= 1");
  if (!(w > 0.0)) {
    if (w == 0.0) return m == 1 ? std::sqrt(2.0 / M_PI) : 0.0;
    return 0.0;
  }
  const double md = static_cast<double>(m);
  // density of sqrt(chi^2_m / m), evaluated in log space for large m
  const double lf = std::log(2.0) + 0.5 * md * std::log(md / 2.0) +
                    (md - 1.0) * std::log(w) - 0.5 * md * w * w -
                    std::lgamma(md / 2.0);
  return std::exp(lf);
}

double expected_w(int m) {
  if (m < 1) throw InputError("expected_w: degrees of freedom must be >= 1");
  const double md = static_cast<double>(m);
  return std::sqrt(2.0 / md) *
         std::exp(std::lgamma((md + 1.0) / 2.0) - std::lgamma(md / 2.0));
}

double w_cdf(double w, int m) {
  if (m < 1) throw InputError("w_cdf: degrees of freedom must be >= 1");
  if (w <= 0.0) return 0.0;
  const double md = static_cast<double>(m);
  return inc_gamma_p(md / 2.0, 0.5 * md * w * w);
}

std::pair<double, double> w_truncation_bounds(int m, double tail_mass) {
  if (m < 1) throw InputError("w_truncation_bounds: degrees of freedom must be >= 1");
  if (!(tail_mass > 0.0) || !(tail_mass < 0.5))
    throw InputError("w_truncation_bounds: tail_mass must lie in (0, 0.5)");
  auto quantile = [&](double p) {
    double lo = 0.0, hi = 2.0;
    while (w_cdf(hi, m) < p) {
      hi *= 2.0;
      if (hi > 1e6) throw AccuracyError("w_truncation_bounds: bracket expansion failed");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (w_cdf(mid, m) < p)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  return {quantile(tail_mass), quantile(1.0 - tail_mass)};
}

WLaw::WLaw(int m) : m_(m) {
  if (m < 1) throw InputError("WLaw: degrees of freedom must be >= 1");
}

double WLaw::critical(double alpha) const {
  return sigma_known() ? z_quantile(alpha) : t_quantile(m_, alpha);
}

double WLaw::expected_w() const {
  return sigma_known() ? 1.0 : cirisk::expected_w(m_);
}

double WLaw::density(double w) const {
  if (sigma_known())
    throw InputError("WLaw::density: W is a point mass when sigma is known");
  return w_density(w, m_);
}

std::pair<double, double> WLaw::truncation_bounds(double tail_mass) const {
  if (sigma_known()) return {1.0, 1.0};
  return w_truncation_bounds(m_, tail_mass);
}

double integrate_semi_infinite_w(const std::function<double(double)>& f,
                                 const WLaw& wlaw, const QuadratureSpec& spec) {
  spec.validate();
  if (wlaw.sigma_known()) {
    const double v = f(1.0);
    if (!std::isfinite(v))
      throw EvaluationError("integrate_semi_infinite_w: f(1) is non-finite");
    return v;
  }
  const double tail = std::min(1e-10, spec.abs_tol * 1e-3);
  auto [lo, hi] = wlaw.truncation_bounds(tail);
  if (spec.w_upper > 0.0) hi = spec.w_upper;
  auto g = [&](double w) { return f(w) * wlaw.density(w); };
  return integrate_1d(g, lo, hi, spec);
}

double integrate_semi_infinite_w(const std::function<double(double)>& f, int m,
                                 const QuadratureSpec& spec) {
  return integrate_semi_infinite_w(f, WLaw(m), spec);
}

}  // namespace cirisk
