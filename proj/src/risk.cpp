#include "cirisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cirisk/errors.hpp"

namespace cirisk {

namespace {

void require_member(const BSFunctions& bs) {
  const std::vector<std::string> violations = validate_f_d(bs);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "procedure is outside its class (" << violations.size()
      << " violation(s)):";
  for (const std::string& v : violations) msg << "\n  - " << v;
  throw InputError(msg.str());
}

void require_rho(double rho) {
  if (!(std::abs(rho) < 1.0) || !std::isfinite(rho))
    throw InputError("requires |rho| < 1");
}

struct ScaleGrid {
  std::vector<double> w;
  std::vector<double> wt1;  // quad weight * w   * density   (point mass: 1)
  std::vector<double> wt2;  // quad weight * w^2 * density   (point mass: 1)
  double w_hi = 1.0;
};

ScaleGrid build_scale_grid(const WLaw& wlaw, const QuadratureSpec& spec,
                           int nodes_per_panel) {
  ScaleGrid g;
  if (wlaw.sigma_known()) {
    g.w = {1.0};
    g.wt1 = {1.0};
    g.wt2 = {1.0};
    g.w_hi = 1.0;
    return g;
  }
  const double tail = std::min(1e-10, spec.abs_tol * 1e-3);
  auto [lo, hi] = wlaw.truncation_bounds(tail);
  if (spec.w_upper > 0.0) hi = spec.w_upper;
  g.w_hi = hi;
  const std::vector<double> edges = make_panels(lo, hi, {}, spec.panels_per_unit);
  const PanelGrid pg = panel_grid(edges, nodes_per_panel);
  g.w = pg.x;
  g.wt1.resize(g.w.size());
  g.wt2.resize(g.w.size());
  for (size_t i = 0; i < g.w.size(); ++i) {
    const double f = wlaw.density(g.w[i]);
    g.wt1[i] = pg.w[i] * g.w[i] * f;
    g.wt2[i] = pg.w[i] * g.w[i] * g.w[i] * f;
  }
  return g;
}

struct StatGrid {
  std::vector<double> x;
  std::vector<double> xw;
  std::vector<double> b;
  std::vector<double> s;
  std::vector<double> len_coeff;   // xw * (s - t); 0 entries are skippable
  std::vector<int> active;        // indices where (b, s) != (0, t)
};

StatGrid build_stat_grid(const BSFunctions& bs, double lo, double hi,
                         const QuadratureSpec& spec, int nodes_per_panel) {
  std::vector<double> bp;
  for (double v : bs.quadrature_breakpoints()) {
    bp.push_back(v);
    bp.push_back(-v);
  }
  const std::vector<double> edges = make_panels(lo, hi, bp, spec.panels_per_unit);
  const PanelGrid pg = panel_grid(edges, nodes_per_panel);
  StatGrid g;
  g.x = pg.x;
  g.xw = pg.w;
  const double t = bs.t_m();
  g.b.resize(g.x.size());
  g.s.resize(g.x.size());
  g.len_coeff.resize(g.x.size());
  for (size_t j = 0; j < g.x.size(); ++j) {
    g.b[j] = bs.b(g.x[j]);
    g.s[j] = bs.s(std::abs(g.x[j]));
    g.len_coeff[j] = g.xw[j] * (g.s[j] - t);
    if (!(g.b[j] == 0.0 && g.s[j] == t))
      g.active.push_back(static_cast<int>(j));
  }
  return g;
}

}  // namespace

struct RiskEvaluator::Impl {
  double rho = 0.0;
  double omr2 = 1.0;  // 1 - rho^2
  double sd = 1.0;    // sqrt(1 - rho^2)
  double t = 0.0;
  double e_w = 1.0;
  double alpha = 0.0;
  double abs_tol = 1e-7;
  bool verify = true;

  struct Pass {
    ScaleGrid wg;
    StatGrid xg;
  };
  Pass coarse, fine;

  double r1_pass(const Pass& p, double gamma) const {
    double acc = 0.0, comp = 0.0;
    for (size_t i = 0; i < p.wg.w.size(); ++i) {
      const double wi = p.wg.w[i];
      double inner = 0.0;
      for (size_t j = 0; j < p.xg.x.size(); ++j) {
        const double c = p.xg.len_coeff[j];
        if (c == 0.0) continue;
        inner += c * phi(wi * p.xg.x[j] - gamma);
      }
      const double term = p.wg.wt2[i] * inner;
      const double tsum = acc + term;
      comp += (std::abs(acc) >= std::abs(term)) ? (acc - tsum) + term
                                                : (term - tsum) + acc;
      acc = tsum;
    }
    return (acc + comp) / (t * e_w);
  }

  double r2_pass(const Pass& p, double gamma) const {
    double acc = 0.0, comp = 0.0;
    for (size_t i = 0; i < p.wg.w.size(); ++i) {
      const double wi = p.wg.w[i];
      const double tw = t * wi;
      double inner = 0.0;
      for (int jj : p.xg.active) {
        const size_t j = static_cast<size_t>(jj);
        const double y = wi * p.xg.x[j] - gamma;
        const double mu = rho * y;
        const double a1 = (p.xg.b[j] - p.xg.s[j]) * wi;
        const double a2 = (p.xg.b[j] + p.xg.s[j]) * wi;
        const double diff = normal_cdf((a2 - mu) / sd) - normal_cdf((a1 - mu) / sd) -
                            normal_cdf((tw - mu) / sd) + normal_cdf((-tw - mu) / sd);
        inner += p.xg.xw[j] * diff * phi(y);
      }
      const double term = p.wg.wt1[i] * inner;
      const double tsum = acc + term;
      comp += (std::abs(acc) >= std::abs(term)) ? (acc - tsum) + term
                                                : (term - tsum) + acc;
      acc = tsum;
    }
    return -(acc + comp);
  }

  double verified(double coarse_v, double fine_v, const char* what) const {
    if (std::abs(fine_v - coarse_v) > abs_tol) {
      std::ostringstream msg;
      msg.precision(17);
      msg << what << ": node-doubling check failed: " << coarse_v << " vs "
          << fine_v;
      throw AccuracyError(msg.str());
    }
    return fine_v;
  }
};

RiskEvaluator::RiskEvaluator(const BSFunctions& bs, double rho,
                             const WLaw& wlaw, double alpha,
                             const QuadratureSpec& spec) {
  spec.validate();
  require_member(bs);
  require_rho(rho);
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw InputError("RiskEvaluator: alpha must lie in (0, 1)");
  impl_ = std::make_unique<Impl>();
  impl_->rho = rho;
  impl_->omr2 = 1.0 - rho * rho;
  impl_->sd = std::sqrt(impl_->omr2);
  impl_->t = bs.t_m();
  impl_->e_w = wlaw.expected_w();
  impl_->alpha = alpha;
  impl_->abs_tol = spec.abs_tol;
  impl_->verify = spec.verify_by_doubling;
  const double d = bs.d();
  impl_->coarse.wg = build_scale_grid(wlaw, spec, spec.nodes_per_panel);
  impl_->coarse.xg = build_stat_grid(bs, -d, d, spec, spec.nodes_per_panel);
  if (impl_->verify) {
    impl_->fine.wg = build_scale_grid(wlaw, spec, 2 * spec.nodes_per_panel);
    impl_->fine.xg = build_stat_grid(bs, -d, d, spec, 2 * spec.nodes_per_panel);
  }
}

RiskEvaluator::~RiskEvaluator() = default;
RiskEvaluator::RiskEvaluator(RiskEvaluator&&) noexcept = default;
RiskEvaluator& RiskEvaluator::operator=(RiskEvaluator&&) noexcept = default;

double RiskEvaluator::r1(double gamma) const {
  if (!std::isfinite(gamma)) throw InputError("r1: gamma must be finite");
  const double c = impl_->r1_pass(impl_->coarse, gamma);
  if (!impl_->verify) return c;
  return impl_->verified(c, impl_->r1_pass(impl_->fine, gamma), "r1");
}

double RiskEvaluator::r2(double gamma) const {
  if (!std::isfinite(gamma)) throw InputError("r2: gamma must be finite");
  const double c = impl_->r2_pass(impl_->coarse, gamma);
  if (!impl_->verify) return c;
  return impl_->verified(c, impl_->r2_pass(impl_->fine, gamma), "r2");
}

RiskPoint RiskEvaluator::at(double gamma) const {
  RiskPoint p;
  p.gamma = gamma;
  p.r1 = r1(gamma);
  p.r2 = r2(gamma);
  p.coverage = 1.0 - impl_->alpha - p.r2;
  p.scaled_length = 1.0 + p.r1;
  return p;
}

double RiskEvaluator::t_m() const { return impl_->t; }
double RiskEvaluator::e_w() const { return impl_->e_w; }
double RiskEvaluator::alpha() const { return impl_->alpha; }
double RiskEvaluator::w_hi() const { return impl_->coarse.wg.w_hi; }

double r1(const BSFunctions& bs, double gamma, const WLaw& wlaw, double alpha,
          const QuadratureSpec& spec) {
  return RiskEvaluator(bs, 0.0, wlaw, alpha, spec).r1(gamma);
}

double r1(const BSFunctions& bs, double gamma, int m, double alpha,
          const QuadratureSpec& spec) {
  return r1(bs, gamma, WLaw(m), alpha, spec);
}

double r2(const BSFunctions& bs, double gamma, double rho, const WLaw& wlaw,
          double alpha, const QuadratureSpec& spec) {
  return RiskEvaluator(bs, rho, wlaw, alpha, spec).r2(gamma);
}

double r2(const BSFunctions& bs, double gamma, double rho, int m, double alpha,
          const QuadratureSpec& spec) {
  return r2(bs, gamma, rho, WLaw(m), alpha, spec);
}

double integral_r1_closed(const BSFunctions& bs, const WLaw& wlaw,
                          double alpha) {
  (void)alpha;  // t_m is already baked into bs; alpha kept for signature parity
  require_member(bs);
  const double t = bs.t_m();
  const double d = bs.d();
  double acc = 0.0;
  for (const BSSegment& seg : bs.segments()) {
    const double lo = seg.x_lo;
    const double hi = std::min(seg.x_hi, d);
    if (hi <= lo) continue;
    double s_at_lo, s_at_hi;
    if (seg.mode == SegmentMode::step) {
      s_at_lo = s_at_hi = seg.s_lo;
    } else {
      const double width = seg.x_hi - seg.x_lo;
      s_at_lo = seg.s_lo + (seg.s_hi - seg.s_lo) * (lo - seg.x_lo) / width;
      s_at_hi = seg.s_lo + (seg.s_hi - seg.s_lo) * (hi - seg.x_lo) / width;
    }
    acc += (0.5 * (s_at_lo + s_at_hi) - t) * (hi - lo);
  }
  return 2.0 * acc / (t * wlaw.expected_w());
}

double integral_r1_closed(const BSFunctions& bs, int m, double alpha) {
  return integral_r1_closed(bs, WLaw(m), alpha);
}

double integral_r2_bound(const BSFunctions& bs, const WLaw& wlaw) {
  return 2.0 * bs.d() * wlaw.expected_w();
}

namespace {

double integral_r2_reduced(const BSFunctions& bs, const WLaw& wlaw,
                           const QuadratureSpec& spec) {
  const double t = bs.t_m();
  const double d = bs.d();
  auto pass = [&](int nodes) {
    const ScaleGrid wg = build_scale_grid(wlaw, spec, nodes);
    const StatGrid xg = build_stat_grid(bs, 0.0, d, spec, nodes);
    double acc = 0.0, comp = 0.0;
    for (size_t i = 0; i < wg.w.size(); ++i) {
      const double wi = wg.w[i];
      const double phi_t2 = 2.0 * normal_cdf(t * wi);
      double inner = 0.0;
      for (int jj : xg.active) {
        const size_t j = static_cast<size_t>(jj);
        const double bracket = normal_cdf((xg.b[j] + xg.s[j]) * wi) +
                               normal_cdf((xg.s[j] - xg.b[j]) * wi) - phi_t2;
        inner += xg.xw[j] * bracket;
      }
      const double term = wg.wt1[i] * inner;
      const double tsum = acc + term;
      comp += (std::abs(acc) >= std::abs(term)) ? (acc - tsum) + term
                                                : (term - tsum) + acc;
      acc = tsum;
    }
    return -2.0 * (acc + comp);
  };
  const double coarse = pass(spec.nodes_per_panel);
  if (!spec.verify_by_doubling) return coarse;
  const double fine = pass(2 * spec.nodes_per_panel);
  if (std::abs(fine - coarse) > spec.abs_tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "integral_r2 (reduced): node-doubling check failed: " << coarse
        << " vs " << fine;
    throw AccuracyError(msg.str());
  }
  return fine;
}

double integral_r2_gamma_quad(const BSFunctions& bs, double rho,
                              const WLaw& wlaw, double alpha,
                              const QuadratureSpec& spec) {
  const RiskEvaluator eval(bs, rho, wlaw, alpha, spec);
  const double width = bs.d() * eval.w_hi() + spec.gamma_margin;
  auto f = [&eval](double gamma) { return eval.r2(gamma); };
  return integrate_1d(f, -width, width, spec);
}

}  // namespace

double integral_r2(const BSFunctions& bs, double rho, const WLaw& wlaw,
                   double alpha, const QuadratureSpec& spec, R2Route route) {
  spec.validate();
  require_member(bs);
  require_rho(rho);
  switch (route) {
    case R2Route::reduced:
      return integral_r2_reduced(bs, wlaw, spec);
    case R2Route::gamma_quadrature:
      return integral_r2_gamma_quad(bs, rho, wlaw, alpha, spec);
  }
  throw InputError("integral_r2: unknown route");
}

double integral_r2(const BSFunctions& bs, double rho, int m, double alpha,
                   const QuadratureSpec& spec, R2Route route) {
  return integral_r2(bs, rho, WLaw(m), alpha, spec, route);
}

double g_objective(const BSFunctions& bs, double lambda, double rho,
                   const WLaw& wlaw, double alpha, const QuadratureSpec& spec,
                   R2Route route) {
  if (!(lambda >= 0.0) || !(lambda <= 1.0))
    throw InputError("g_objective: lambda must lie in [0, 1]");
  const double i1 = integral_r1_closed(bs, wlaw, alpha);
  const double i2 = integral_r2(bs, rho, wlaw, alpha, spec, route);
  return lambda * i1 + (1.0 - lambda) * i2;
}

double g_objective(const BSFunctions& bs, double lambda, double rho, int m,
                   double alpha, const QuadratureSpec& spec, R2Route route) {
  return g_objective(bs, lambda, rho, WLaw(m), alpha, spec, route);
}

double RiskCurve::min_coverage() const {
  double v = 1.0;
  for (const RiskPoint& p : points) v = std::min(v, p.coverage);
  return v;
}

double RiskCurve::max_scaled_length() const {
  double v = 0.0;
  for (const RiskPoint& p : points) v = std::max(v, p.scaled_length);
  return v;
}

double RiskCurve::min_scaled_length() const {
  double v = points.empty() ? 0.0 : points.front().scaled_length;
  for (const RiskPoint& p : points) v = std::min(v, p.scaled_length);
  return v;
}

RiskCurve risk_curve(const BSFunctions& bs, double rho, const WLaw& wlaw,
                     double alpha, double gamma_lo, double gamma_hi,
                     int n_points, const QuadratureSpec& spec) {
  if (n_points < 2) throw InputError("risk_curve: need at least 2 points");
  if (!(gamma_lo < gamma_hi))
    throw InputError("risk_curve: need gamma_lo < gamma_hi");
  const RiskEvaluator eval(bs, rho, wlaw, alpha, spec);
  RiskCurve curve;
  curve.alpha = alpha;
  curve.rho = rho;
  curve.m = wlaw.df();
  curve.points.reserve(static_cast<size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double gamma =
        gamma_lo + (gamma_hi - gamma_lo) * i / (n_points - 1);
    curve.points.push_back(eval.at(gamma));
  }
  return curve;
}

RiskCurve risk_curve(const BSFunctions& bs, double rho, int m, double alpha,
                     double gamma_lo, double gamma_hi, int n_points,
                     const QuadratureSpec& spec) {
  return risk_curve(bs, rho, WLaw(m), alpha, gamma_lo, gamma_hi, n_points, spec);
}

}  // namespace cirisk
