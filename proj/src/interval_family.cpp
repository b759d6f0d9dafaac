#include "cirisk/interval_family.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cirisk/errors.hpp"

namespace cirisk {

namespace {

bool differs(double a, double b) {
  return std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

// left limit of (b, s) at the right edge of a segment
std::pair<double, double> right_limit(const BSSegment& seg) {
  return {seg.b_hi, seg.s_hi};
}

// value of (b, s) at the left edge of a segment
std::pair<double, double> left_value(const BSSegment& seg) {
  return {seg.b_lo, seg.s_lo};
}

}  // namespace

BSFunctions::BSFunctions(double d, double t_m, std::vector<BSSegment> segments,
                         std::string label)
    : d_(d), t_m_(t_m), segments_(std::move(segments)), label_(std::move(label)) {
  if (!(d_ > 0.0) || !std::isfinite(d_))
    throw InputError("BSFunctions: d must be finite and > 0");
  if (!(t_m_ > 0.0) || !std::isfinite(t_m_))
    throw InputError("BSFunctions: t_m must be finite and > 0");

  double cursor = 0.0;
  for (size_t i = 0; i < segments_.size(); ++i) {
    BSSegment& seg = segments_[i];
    if (!std::isfinite(seg.x_lo) || !std::isfinite(seg.x_hi) ||
        !std::isfinite(seg.b_lo) || !std::isfinite(seg.b_hi) ||
        !std::isfinite(seg.s_lo) || !std::isfinite(seg.s_hi))
      throw InputError("BSFunctions: segment has non-finite entries");
    if (std::abs(seg.x_lo - cursor) > 1e-12 * std::max(1.0, cursor)) {
      std::ostringstream msg;
      msg << "BSFunctions: segments must tile [0, x_end) contiguously; segment "
          << i << " starts at " << seg.x_lo << ", expected " << cursor;
      throw InputError(msg.str());
    }
    if (!(seg.x_hi > seg.x_lo))
      throw InputError("BSFunctions: segment must have x_hi > x_lo");
    if (seg.mode == SegmentMode::step) {
      seg.b_hi = seg.b_lo;  // canonical form; hi values are meaningless for steps
      seg.s_hi = seg.s_lo;
    }
    cursor = seg.x_hi;
  }

  edges_.reserve(segments_.size() + 1);
  edges_.push_back(0.0);
  for (const BSSegment& seg : segments_) edges_.push_back(seg.x_hi);

  // jump detection: odd extension at 0, interior hand-offs, tail hand-off
  if (!segments_.empty() && differs(segments_.front().b_lo, 0.0))
    discontinuities_.push_back(0.0);
  for (size_t i = 0; i + 1 < segments_.size(); ++i) {
    const auto [bl, sl] = right_limit(segments_[i]);
    const auto [br, sr] = left_value(segments_[i + 1]);
    if (differs(bl, br) || differs(sl, sr))
      discontinuities_.push_back(segments_[i].x_hi);
  }
  if (!segments_.empty()) {
    const auto [bl, sl] = right_limit(segments_.back());
    if (differs(bl, 0.0) || differs(sl, t_m_))
      discontinuities_.push_back(segments_.back().x_hi);
  }
}

double BSFunctions::x_end() const {
  return segments_.empty() ? 0.0 : segments_.back().x_hi;
}

double BSFunctions::b(double x) const {
  if (x == 0.0) return 0.0;  // odd function
  const double sign = x < 0.0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (segments_.empty() || ax >= edges_.back()) return 0.0;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), ax);
  const size_t i = static_cast<size_t>(it - edges_.begin()) - 1;
  const BSSegment& seg = segments_[std::min(i, segments_.size() - 1)];
  if (seg.mode == SegmentMode::step) return sign * seg.b_lo;
  const double u = (ax - seg.x_lo) / (seg.x_hi - seg.x_lo);
  return sign * (seg.b_lo + (seg.b_hi - seg.b_lo) * u);
}

double BSFunctions::s(double x) const {
  const double ax = std::abs(x);
  if (segments_.empty() || ax >= edges_.back()) return t_m_;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), ax);
  const size_t i = static_cast<size_t>(it - edges_.begin()) - 1;
  const BSSegment& seg = segments_[std::min(i, segments_.size() - 1)];
  if (seg.mode == SegmentMode::step) return seg.s_lo;
  const double u = (ax - seg.x_lo) / (seg.x_hi - seg.x_lo);
  return seg.s_lo + (seg.s_hi - seg.s_lo) * u;
}

std::vector<double> BSFunctions::quadrature_breakpoints() const {
  std::vector<double> bp = edges_;
  bp.insert(bp.end(), discontinuities_.begin(), discontinuities_.end());
  bp.push_back(d_);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end(),
                       [](double a, double b) { return b - a < 1e-13; }),
           bp.end());
  return bp;
}

nlohmann::json BSFunctions::to_json() const {
  nlohmann::json j;
  j["d"] = d_;
  j["t_m"] = t_m_;
  if (!label_.empty()) j["label"] = label_;
  j["segments"] = nlohmann::json::array();
  for (const BSSegment& seg : segments_) {
    j["segments"].push_back({{"x_lo", seg.x_lo},
                             {"x_hi", seg.x_hi},
                             {"mode", seg.mode == SegmentMode::step ? "step" : "linear"},
                             {"b_lo", seg.b_lo},
                             {"b_hi", seg.b_hi},
                             {"s_lo", seg.s_lo},
                             {"s_hi", seg.s_hi}});
  }
  return j;
}

BSFunctions BSFunctions::from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw InputError("bs json: top level must be an object");
    const double d = j.at("d").get<double>();
    const double t_m = j.at("t_m").get<double>();
    std::string label = j.value("label", std::string{});
    std::vector<BSSegment> segs;
    if (j.contains("segments")) {
      if (!j.at("segments").is_array())
        throw InputError("bs json: segments must be an array");
      for (const auto& js : j.at("segments")) {
        BSSegment seg;
        seg.x_lo = js.at("x_lo").get<double>();
        seg.x_hi = js.at("x_hi").get<double>();
        const std::string mode = js.at("mode").get<std::string>();
        if (mode == "step")
          seg.mode = SegmentMode::step;
        else if (mode == "linear")
          seg.mode = SegmentMode::linear;
        else
          throw InputError("bs json: mode must be 'step' or 'linear'");
        seg.b_lo = js.at("b_lo").get<double>();
        seg.b_hi = js.value("b_hi", seg.b_lo);
        seg.s_lo = js.at("s_lo").get<double>();
        seg.s_hi = js.value("s_hi", seg.s_lo);
        segs.push_back(seg);
      }
    }
    return BSFunctions(d, t_m, std::move(segs), std::move(label));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bs json: ") + e.what());
  }
}

BSFunctions usual_interval(const WLaw& wlaw, double alpha) {
  return BSFunctions(wlaw.critical(alpha), wlaw.critical(alpha), {}, "usual");
}

BSFunctions usual_interval(int m, double alpha) {
  return usual_interval(WLaw(m), alpha);
}

BSFunctions naive_pretest(double q, double rho, const WLaw& wlaw, double alpha) {
  if (!(q > 0.0) || !std::isfinite(q))
    throw InputError("naive_pretest: cutoff q must be finite and > 0");
  if (!(std::abs(rho) < 1.0))
    throw InputError("naive_pretest: requires |rho| < 1");
  const double t = wlaw.critical(alpha);
  BSSegment seg;
  seg.x_lo = 0.0;
  seg.x_hi = q;
  seg.mode = SegmentMode::linear;
  seg.b_lo = 0.0;
  seg.b_hi = rho * q;
  seg.s_lo = seg.s_hi = t * std::sqrt(1.0 - rho * rho);
  return BSFunctions(q, t, {seg}, "naive_pretest");
}

BSFunctions naive_pretest(double q, double rho, int m, double alpha) {
  return naive_pretest(q, rho, WLaw(m), alpha);
}

std::function<double(double)> smoothstep_weight(double q) {
  if (!(q > 0.0)) throw InputError("smoothstep_weight: q must be > 0");
  return [q](double x) {
    const double u = std::clamp(x / q, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
  };
}

BSFunctions smooth_mixture(const std::function<double(double)>& h, double q,
                           double rho, const WLaw& wlaw, double alpha,
                           int grid_segments) {
  if (!(q > 0.0) || !std::isfinite(q))
    throw InputError("smooth_mixture: cutoff q must be finite and > 0");
  if (!(std::abs(rho) < 1.0))
    throw InputError("smooth_mixture: requires |rho| < 1");
  if (grid_segments < 1) throw InputError("smooth_mixture: grid_segments must be >= 1");
  const double t = wlaw.critical(alpha);
  const double s_pre = t * std::sqrt(1.0 - rho * rho);

  std::vector<double> hv(static_cast<size_t>(grid_segments) + 1);
  for (int j = 0; j <= grid_segments; ++j) {
    const double x = q * j / grid_segments;
    const double v = h(x);
    if (!(v >= 0.0) || !(v <= 1.0) || !std::isfinite(v))
      throw InputError("smooth_mixture: weight must map [0, q] into [0, 1]");
    hv[static_cast<size_t>(j)] = v;
  }
  // the member must hand off exactly to the usual tail at d = q
  if (std::abs(hv.back() - 1.0) > 1e-12)
    throw InputError("smooth_mixture: weight must equal 1 at the cutoff q");
  hv.back() = 1.0;

  std::vector<BSSegment> segs;
  segs.reserve(static_cast<size_t>(grid_segments));
  for (int j = 0; j < grid_segments; ++j) {
    const double x0 = q * j / grid_segments;
    const double x1 = (j + 1 == grid_segments) ? q : q * (j + 1) / grid_segments;
    const double h0 = hv[static_cast<size_t>(j)], h1 = hv[static_cast<size_t>(j) + 1];
    BSSegment seg;
    seg.x_lo = x0;
    seg.x_hi = x1;
    seg.mode = SegmentMode::linear;
    seg.b_lo = rho * x0 * (1.0 - h0);
    seg.b_hi = rho * x1 * (1.0 - h1);
    seg.s_lo = s_pre * (1.0 - h0) + t * h0;
    seg.s_hi = s_pre * (1.0 - h1) + t * h1;
    segs.push_back(seg);
  }
  return BSFunctions(q, t, std::move(segs), "smooth_mixture");
}

BSFunctions smooth_mixture(const std::function<double(double)>& h, double q,
                           double rho, int m, double alpha, int grid_segments) {
  return smooth_mixture(h, q, rho, WLaw(m), alpha, grid_segments);
}

std::vector<std::string> validate_f_d(const BSFunctions& bs) {
  std::vector<std::string> violations;
  const double t = bs.t_m();
  const double d = bs.d();
  auto report = [&violations](const std::ostringstream& msg) {
    violations.push_back(msg.str());
  };

  for (const BSSegment& seg : bs.segments()) {
    const bool step = seg.mode == SegmentMode::step;
    const double s_min = step ? seg.s_lo : std::min(seg.s_lo, seg.s_hi);
    if (!(s_min > 0.0)) {
      std::ostringstream msg;
      msg << "s must be strictly positive on [" << seg.x_lo << ", " << seg.x_hi
          << "): minimum value " << s_min;
      report(msg);
    }
    // beyond d the member must coincide with the usual interval
    const double tail_lo = std::max(seg.x_lo, d);
    if (seg.x_hi > d + 1e-12) {
      bool tail_usual;
      if (step) {
        tail_usual = !differs(seg.b_lo, 0.0) && !differs(seg.s_lo, t);
      } else if (seg.x_lo >= d - 1e-12) {
        tail_usual = !differs(seg.b_lo, 0.0) && !differs(seg.b_hi, 0.0) &&
                     !differs(seg.s_lo, t) && !differs(seg.s_hi, t);
      } else {
        // straddles d: accept only if constant at (0, t) over the whole piece
        tail_usual = !differs(seg.b_lo, 0.0) && !differs(seg.b_hi, 0.0) &&
                     !differs(seg.s_lo, t) && !differs(seg.s_hi, t);
      }
      if (!tail_usual) {
        std::ostringstream msg;
        msg << "(b, s) must equal (0, t_m) on [" << tail_lo << ", " << seg.x_hi
            << ") beyond d = " << d;
        report(msg);
      }
    }
  }
  return violations;
}

IntervalRealization evaluate_interval(const BSFunctions& bs,
                                      const SufficientStats& stats,
                                      const Geometry& geom) {
  if (stats.m != geom.m)
    throw DimensionError(
        "evaluate_interval: stats and geometry disagree on residual df");
  if (!(stats.sigma_hat > 0.0))
    throw DegenerateDataError("evaluate_interval: sigma_hat must be > 0");
  const double scale = std::sqrt(geom.v11) * stats.sigma_hat;
  IntervalRealization out;
  out.x_stat = stats.x_stat;
  out.center = stats.theta_hat - scale * bs.b(stats.x_stat);
  out.half_width = scale * bs.s(std::abs(stats.x_stat));
  out.lower = out.center - out.half_width;
  out.upper = out.center + out.half_width;
  return out;
}

LengthComparison pointwise_length_compare(const BSFunctions& bs) {
  const double t = bs.t_m();
  LengthComparison out;
  double max_s = t, min_s = t;  // tail values beyond x_end
  for (const BSSegment& seg : bs.segments()) {
    const double lo = seg.s_lo;
    const double hi = seg.mode == SegmentMode::step ? seg.s_lo : seg.s_hi;
    max_s = std::max({max_s, lo, hi});
    min_s = std::min({min_s, lo, hi});
  }
  out.max_excess = max_s - t;
  out.max_saving = t - min_s;
  out.never_longer = out.max_excess <= 1e-12 * std::max(1.0, t);
  out.strictly_shorter_somewhere = out.max_saving > 1e-12 * std::max(1.0, t);
  return out;
}

}  // namespace cirisk
