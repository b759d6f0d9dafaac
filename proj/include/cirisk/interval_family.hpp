#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cirisk/design.hpp"
#include "cirisk/numerics.hpp"

namespace cirisk {

// One piece of the piecewise description of (b, s) on [x_lo, x_hi).
// step: constant at (b_lo, s_lo).  linear: interpolates lo -> hi values.
enum class SegmentMode { step, linear };

struct BSSegment {
  double x_lo = 0.0;
  double x_hi = 0.0;
  SegmentMode mode = SegmentMode::step;
  double b_lo = 0.0;
  double b_hi = 0.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
};

// A candidate confidence procedure: the interval is
//   [center - b(x) * scale  +/-  s(|x|) * scale]
// where x is the standardized pre-test statistic and scale the estimated
// standard error of the target contrast.  b is extended to an odd function;
// s is a function of |x|.  Segments describe [0, x_end); beyond the last
// segment the procedure reverts to the usual interval: b = 0, s = t_m.
// An empty segment list therefore IS the usual interval.
class BSFunctions {
 public:
  BSFunctions(double d, double t_m, std::vector<BSSegment> segments,
              std::string label = {});

  double d() const { return d_; }
  double t_m() const { return t_m_; }
  double x_end() const;

  double b(double x) const;
  double s(double x) const;  // evaluated at |x|

  std::span<const BSSegment> segments() const { return segments_; }
  const std::string& label() const { return label_; }

  // jump locations detected from the segment data (includes 0 when the odd
  // extension of b jumps there, and x_end when the hand-off to the usual
  // tail is discontinuous)
  const std::vector<double>& discontinuities() const { return discontinuities_; }

  // every abscissa where smoothness may fail: segment edges, jumps, and d
  std::vector<double> quadrature_breakpoints() const;

  nlohmann::json to_json() const;
  static BSFunctions from_json(const nlohmann::json& j);

 private:
  double d_;
  double t_m_;
  std::vector<BSSegment> segments_;
  std::vector<double> edges_;  // 0 = e_0 < e_1 < ... < e_k = x_end
  std::vector<double> discontinuities_;
  std::string label_;
};

// Named family members ------------------------------------------------------

// b = 0, s = t everywhere: the standard interval.
BSFunctions usual_interval(const WLaw& wlaw, double alpha);
BSFunctions usual_interval(int m, double alpha);

// Pre-test procedure: accept tau = 0 when |x| < q and use the interval that
// assumes it (center shifted by rho * x, half-width shrunk by sqrt(1-rho^2));
// otherwise fall back to the usual interval.
BSFunctions naive_pretest(double q, double rho, const WLaw& wlaw, double alpha);
BSFunctions naive_pretest(double q, double rho, int m, double alpha);

// Continuous deformation between the pre-test interval (weight 0) and the
// usual interval (weight 1).  h must map [0, q] into [0, 1] with h(q) = 1 so
// the member hands off exactly to the usual tail at d = q.  The weight is
// sampled onto grid_segments linear pieces; the sampled piecewise-linear
// functions are the procedure being analysed.
BSFunctions smooth_mixture(const std::function<double(double)>& h, double q,
                           double rho, const WLaw& wlaw, double alpha,
                           int grid_segments = 32);
BSFunctions smooth_mixture(const std::function<double(double)>& h, double q,
                           double rho, int m, double alpha,
                           int grid_segments = 32);

// default mixture weight: the C^1 smoothstep 3u^2 - 2u^3, u = x / q
std::function<double(double)> smoothstep_weight(double q);

// Class membership ----------------------------------------------------------

// Empty result means bs lies in the admissible class for its own (d, t_m):
// s strictly positive and bounded, b bounded and odd, both equal to the
// usual tail (0, t_m) from d onwards, finitely many discontinuities.
std::vector<std::string> validate_f_d(const BSFunctions& bs);

// Realized interval on data -------------------------------------------------

struct IntervalRealization {
  double lower = 0.0;
  double upper = 0.0;
  double center = 0.0;
  double half_width = 0.0;
  double x_stat = 0.0;
};

IntervalRealization evaluate_interval(const BSFunctions& bs,
                                      const SufficientStats& stats,
                                      const Geometry& geom);

// Pointwise half-width comparison against the usual interval ----------------

struct LengthComparison {
  bool never_longer = false;
  bool strictly_shorter_somewhere = false;
  double max_excess = 0.0;  // max over x of s(x) - t_m
  double max_saving = 0.0;  // max over x of t_m - s(x)
};

LengthComparison pointwise_length_compare(const BSFunctions& bs);

}  // namespace cirisk
