#include "cirisk/compromise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cirisk/detail/rng.hpp"
#include "cirisk/errors.hpp"

namespace cirisk {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028654;  // sqrt(2 / pi) = 2 phi(0)

void require_lambda(double lambda) {
  if (!(lambda >= 0.0) || !(lambda < 1.0))
    throw InputError("lambda must lie in [0, 1)");
}

// 2 * integral of phi(s w) w^2 dF_W(w); equals sqrt(2/pi) at s = 0 and
// decreases strictly to 0, which makes r_prime increasing in s
double smoothed_density_term(double s, const WLaw& wlaw,
                             const QuadratureSpec& spec) {
  return integrate_semi_infinite_w(
      [s](double w) { return 2.0 * phi(s * w) * w * w; }, wlaw, spec);
}

}  // namespace

double ell(double lambda, const WLaw& wlaw, double alpha) {
  require_lambda(lambda);
  const double t = wlaw.critical(alpha);
  return lambda / ((1.0 - lambda) * t * wlaw.expected_w());
}

double ell(double lambda, int m, double alpha) {
  return ell(lambda, WLaw(m), alpha);
}

PivotCalibration lambda_star(const WLaw& wlaw, double alpha,
                             const QuadratureSpec& spec) {
  PivotCalibration out;
  out.t_m = wlaw.critical(alpha);
  out.e_w = wlaw.expected_w();
  out.target = smoothed_density_term(out.t_m, wlaw, spec);
  if (!(out.target > 0.0) || !(out.target < kSqrt2OverPi))
    throw AccuracyError(
        "lambda_star: target left (0, sqrt(2/pi)); quadrature is suspect");
  // ell is 0 at lambda = 0 and increases without bound as lambda -> 1
  double lo = 0.0, hi = 1.0 - 1e-12;
  for (int it = 0; it < 200 && (hi - lo) > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ell(mid, wlaw, alpha) < out.target)
      lo = mid;
    else
      hi = mid;
  }
  out.lambda = 0.5 * (lo + hi);
  out.ell = ell(out.lambda, wlaw, alpha);
  if (std::abs(out.ell - out.target) > 1e-10 * std::max(1.0, out.target))
    throw AccuracyError("lambda_star: bisection did not meet tolerance");
  return out;
}

PivotCalibration lambda_star(int m, double alpha, const QuadratureSpec& spec) {
  return lambda_star(WLaw(m), alpha, spec);
}

double r_prime(double s, double lambda, const WLaw& wlaw, double alpha,
               const QuadratureSpec& spec) {
  require_lambda(lambda);
  if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("r_prime: s must be >= 0");
  return ell(lambda, wlaw, alpha) - smoothed_density_term(s, wlaw, spec);
}

double r_value(double s, double lambda, const WLaw& wlaw, double alpha,
               const QuadratureSpec& spec) {
  require_lambda(lambda);
  if (!(s >= 0.0) || !std::isfinite(s)) throw InputError("r_value: s must be >= 0");
  const double t = wlaw.critical(alpha);
  const double length = 2.0 * lambda * (s - t) / (t * wlaw.expected_w());
  const double coverage = integrate_semi_infinite_w(
      [s, t](double w) {
        return (normal_cdf(s * w) - normal_cdf(t * w)) * w;
      },
      wlaw, spec);
  return length - 4.0 * (1.0 - lambda) * coverage;
}

ScalarMin minimize_r(double lambda, const WLaw& wlaw, double alpha,
                     const QuadratureSpec& spec) {
  require_lambda(lambda);
  const double ell_v = ell(lambda, wlaw, alpha);
  ScalarMin out;
  if (ell_v <= 0.0) {
    out.arg = std::numeric_limits<double>::infinity();
    out.value = r_value(1e3, lambda, wlaw, alpha, spec);
    out.degenerate = true;
    out.note =
        "lambda = 0 ignores length: the profile decreases for all s and has "
        "no interior minimum";
    return out;
  }
  if (ell_v >= kSqrt2OverPi) {
    out.arg = 0.0;
    out.value = r_value(0.0, lambda, wlaw, alpha, spec);
    out.degenerate = true;
    out.note =
        "ell(lambda) >= sqrt(2/pi): the profile is nondecreasing and the "
        "formal minimizer is the zero-width interval s = 0";
    return out;
  }
  const double t = wlaw.critical(alpha);
  double lo = 0.0, hi = std::max(1.0, t);
  while (r_prime(hi, lambda, wlaw, alpha, spec) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw AccuracyError("minimize_r: bracket expansion failed");
  }
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (r_prime(mid, lambda, wlaw, alpha, spec) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  out.arg = 0.5 * (lo + hi);
  out.value = r_value(out.arg, lambda, wlaw, alpha, spec);
  out.degenerate = false;
  return out;
}

double tilde_q(double b, double s, double lambda, double rho, const WLaw& wlaw,
               double alpha, const QuadratureSpec& spec, TildeQRoute route) {
  require_lambda(lambda);
  if (!(s > 0.0) || !std::isfinite(s)) throw InputError("tilde_q: s must be > 0");
  if (!std::isfinite(b)) throw InputError("tilde_q: b must be finite");
  if (!(std::abs(rho) < 1.0)) throw InputError("tilde_q: requires |rho| < 1");
  const double t = wlaw.critical(alpha);
  const double length = 2.0 * lambda * (s - t) / (t * wlaw.expected_w());

  double coverage;
  if (route == TildeQRoute::reduced) {
    coverage = integrate_semi_infinite_w(
        [b, s, t](double w) {
          return (normal_cdf((b + s) * w) + normal_cdf((s - b) * w) -
                  2.0 * normal_cdf(t * w)) *
                 w;
        },
        wlaw, spec);
  } else {
    const double omr2 = 1.0 - rho * rho;
    const double y_max = std::max(8.5, spec.gamma_margin);
    coverage = integrate_semi_infinite_w(
        [&](double w) {
          auto inner = [&](double y) {
            const double mu = rho * y;
            const double k = psi((b - s) * w, (b + s) * w, mu, omr2);
            const double k_usual = psi(-t * w, t * w, mu, omr2);
            return phi(y) * (k - k_usual);
          };
          return integrate_1d(inner, -y_max, y_max, spec) * w;
        },
        wlaw, spec);
  }
  return length - 2.0 * (1.0 - lambda) * coverage;
}

ScalarMin minimize_tilde_q(double s, double lambda, double rho,
                           const WLaw& wlaw, double alpha,
                           const QuadratureSpec& spec, double b_abs_max,
                           int n_grid) {
  if (n_grid < 5) throw InputError("minimize_tilde_q: n_grid must be >= 5");
  const double t = wlaw.critical(alpha);
  const double b_max = b_abs_max > 0.0 ? b_abs_max : t;
  auto f = [&](double b) {
    return tilde_q(b, s, lambda, rho, wlaw, alpha, spec, TildeQRoute::reduced);
  };
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  std::vector<double> bgrid(static_cast<size_t>(n_grid));
  for (int k = 0; k < n_grid; ++k) {
    bgrid[static_cast<size_t>(k)] = -b_max + 2.0 * b_max * k / (n_grid - 1);
    const double v = f(bgrid[static_cast<size_t>(k)]);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  // golden-section refine inside the bracketing neighbours (the profile is
  // strictly increasing in |b|, hence unimodal)
  double a = bgrid[static_cast<size_t>(std::max(0, best - 1))];
  double c = bgrid[static_cast<size_t>(std::min(n_grid - 1, best + 1))];
  const double gr = 0.6180339887498949;
  double x1 = c - gr * (c - a), x2 = a + gr * (c - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 120 && (c - a) > 1e-11 * std::max(1.0, std::abs(c));
       ++it) {
    if (f1 < f2) {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - gr * (c - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (c - a);
      f2 = f(x2);
    }
  }
  ScalarMin out;
  out.arg = 0.5 * (a + c);
  out.value = f(out.arg);
  return out;
}

DominanceVerdict dominance_check(const BSFunctions& bs, double rho,
                                 const WLaw& wlaw, double alpha,
                                 std::span<const double> gamma_grid,
                                 const DominanceTols& tols,
                                 const QuadratureSpec& spec) {
  if (gamma_grid.empty()) throw InputError("dominance_check: empty gamma grid");
  const RiskEvaluator eval(bs, rho, wlaw, alpha, spec);
  DominanceVerdict v;
  v.min_coverage = 2.0;
  v.max_scaled_length = -std::numeric_limits<double>::infinity();
  v.min_scaled_length = std::numeric_limits<double>::infinity();
  for (double gamma : gamma_grid) {
    const RiskPoint p = eval.at(gamma);
    if (p.coverage < v.min_coverage) {
      v.min_coverage = p.coverage;
      v.gamma_at_min_coverage = gamma;
    }
    v.max_scaled_length = std::max(v.max_scaled_length, p.scaled_length);
    v.min_scaled_length = std::min(v.min_scaled_length, p.scaled_length);
  }
  v.covers_everywhere = v.min_coverage >= 1.0 - alpha - tols.cov_slack;
  v.never_longer = v.max_scaled_length <= 1.0 + tols.e_slack;
  v.shorter_somewhere = v.min_scaled_length <= 1.0 - tols.strict_margin;
  v.dominates = v.covers_everywhere && v.never_longer && v.shorter_somewhere;
  return v;
}

BSFunctions CandidateSampler::sample(uint64_t seed, int index) const {
  if (!(d > 0.0) || !(t_m > 0.0))
    throw InputError("CandidateSampler: d and t_m must be > 0");
  if (max_segments < 1 || max_segments > 16)
    throw InputError("CandidateSampler: max_segments must lie in [1, 16]");
  if (!(s_lo_frac > 0.0) || !(s_hi_frac >= s_lo_frac))
    throw InputError("CandidateSampler: need 0 < s_lo_frac <= s_hi_frac");

  detail::CounterStream rng(seed, static_cast<uint64_t>(index));
  const int k = 1 + static_cast<int>(rng.next_u64() %
                                     static_cast<uint64_t>(max_segments));
  // internal knots with a minimum gap, so panels stay well conditioned
  const double min_gap = 0.02 * d;
  std::vector<double> knots;
  for (int attempt = 0; attempt < 100; ++attempt) {
    knots.clear();
    for (int j = 0; j < k - 1; ++j)
      knots.push_back(d * (0.05 + 0.90 * rng.uniform()));
    std::sort(knots.begin(), knots.end());
    bool ok = true;
    double prev = 0.0;
    for (double kn : knots) {
      if (kn - prev < min_gap) ok = false;
      prev = kn;
    }
    if (d - prev < min_gap) ok = false;
    if (ok) break;
    if (attempt == 99)
      for (int j = 0; j < k - 1; ++j)
        knots[static_cast<size_t>(j)] = d * (j + 1) / k;
  }

  std::vector<double> edges;
  edges.push_back(0.0);
  edges.insert(edges.end(), knots.begin(), knots.end());
  edges.push_back(d);

  std::vector<BSSegment> segs;
  for (size_t j = 0; j + 1 < edges.size(); ++j) {
    BSSegment seg;
    seg.x_lo = edges[j];
    seg.x_hi = edges[j + 1];
    seg.mode = (rng.next_u64() & 1u) ? SegmentMode::linear : SegmentMode::step;
    auto draw_s = [&] {
      return t_m * (s_lo_frac + (s_hi_frac - s_lo_frac) * rng.uniform());
    };
    auto draw_b = [&] { return t_m * b_frac * (2.0 * rng.uniform() - 1.0); };
    seg.b_lo = draw_b();
    seg.s_lo = draw_s();
    if (seg.mode == SegmentMode::linear) {
      seg.b_hi = draw_b();
      seg.s_hi = draw_s();
    } else {
      seg.b_hi = seg.b_lo;
      seg.s_hi = seg.s_lo;
    }
    segs.push_back(seg);
  }
  std::ostringstream label;
  label << "candidate_" << index;
  return BSFunctions(d, t_m, std::move(segs), label.str());
}

int DominanceSearchReport::n_dominators() const {
  int n = 0;
  for (const CandidateRecord& r : records)
    if (r.verdict.dominates) ++n;
  return n;
}

double DominanceSearchReport::min_g() const {
  double v = std::numeric_limits<double>::infinity();
  for (const CandidateRecord& r : records) v = std::min(v, r.g_at_lambda_star);
  return v;
}

DominanceSearchReport dominance_search(const CandidateSampler& sampler,
                                       int n_candidates, double rho,
                                       const WLaw& wlaw, double alpha,
                                       uint64_t seed,
                                       const DominanceTols& tols,
                                       const QuadratureSpec& spec,
                                       int n_gamma) {
  if (n_candidates < 1) throw InputError("dominance_search: n_candidates must be >= 1");
  if (n_gamma < 9) throw InputError("dominance_search: n_gamma must be >= 9");
  DominanceSearchReport report;
  report.calib = lambda_star(wlaw, alpha, spec);
  report.rho = rho;
  report.alpha = alpha;
  report.m = wlaw.df();
  report.seed = seed;

  const double w_hi =
      wlaw.sigma_known() ? 1.0 : wlaw.truncation_bounds(1e-10).second;
  const double gamma_max = sampler.d * w_hi + spec.gamma_margin;
  report.gamma_grid.resize(static_cast<size_t>(n_gamma));
  for (int i = 0; i < n_gamma; ++i)
    report.gamma_grid[static_cast<size_t>(i)] =
        gamma_max * i / (n_gamma - 1);

  report.records.reserve(static_cast<size_t>(n_candidates));
  for (int i = 0; i < n_candidates; ++i) {
    const BSFunctions bs = sampler.sample(seed, i);
    CandidateRecord rec;
    rec.id = i;
    rec.verdict =
        dominance_check(bs, rho, wlaw, alpha, report.gamma_grid, tols, spec);
    rec.integral_r1 = integral_r1_closed(bs, wlaw, alpha);
    rec.integral_r2 =
        integral_r2(bs, rho, wlaw, alpha, spec, R2Route::reduced);
    rec.g_at_lambda_star = report.calib.lambda * rec.integral_r1 +
                           (1.0 - report.calib.lambda) * rec.integral_r2;
    report.records.push_back(rec);
  }
  return report;
}

}  // namespace cirisk
