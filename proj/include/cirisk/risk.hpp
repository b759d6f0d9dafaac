#pragma once

#include <memory>
#include <vector>

#include "cirisk/interval_family.hpp"
#include "cirisk/numerics.hpp"
#include "cirisk/quadrature.hpp"

namespace cirisk {

// Risk at one noncentrality gamma = tau / (sigma sqrt(v22)):
//   r1: expected-length excess, so scaled expected length e = 1 + r1
//   r2: coverage deficiency,  so coverage probability     = 1 - alpha - r2
struct RiskPoint {
  double gamma = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double coverage = 0.0;
  double scaled_length = 0.0;
};

struct RiskCurve {
  double alpha = 0.0;
  double rho = 0.0;
  int m = 0;  // 0 = known scale
  std::vector<RiskPoint> points;

  double min_coverage() const;
  double max_scaled_length() const;
  double min_scaled_length() const;
};

// Precomputes the tensor product of the scale grid (nodes of the W law) and
// the statistic grid (nodes over [-d, d] split at the member's breakpoints),
// then evaluates r1 / r2 at any gamma by weighted sums of normal quantities.
// With spec.verify_by_doubling every evaluation is recomputed on a doubled
// grid and must agree to spec.abs_tol.
class RiskEvaluator {
 public:
  RiskEvaluator(const BSFunctions& bs, double rho, const WLaw& wlaw,
                double alpha, const QuadratureSpec& spec);
  ~RiskEvaluator();
  RiskEvaluator(RiskEvaluator&&) noexcept;
  RiskEvaluator& operator=(RiskEvaluator&&) noexcept;

  double r1(double gamma) const;
  double r2(double gamma) const;
  RiskPoint at(double gamma) const;

  double t_m() const;
  double e_w() const;
  double alpha() const;
  // upper end of the truncated scale range (1 when sigma is known)
  double w_hi() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Requires bs to lie in its class (validate_f_d empty), since the integrals
// run over [-d, d] only; throws InputError listing the violations otherwise.
double r1(const BSFunctions& bs, double gamma, const WLaw& wlaw, double alpha,
          const QuadratureSpec& spec);
double r1(const BSFunctions& bs, double gamma, int m, double alpha,
          const QuadratureSpec& spec);
double r2(const BSFunctions& bs, double gamma, double rho, const WLaw& wlaw,
          double alpha, const QuadratureSpec& spec);
double r2(const BSFunctions& bs, double gamma, double rho, int m, double alpha,
          const QuadratureSpec& spec);

// integral of r1 over gamma: exact per-segment formula, no quadrature
double integral_r1_closed(const BSFunctions& bs, const WLaw& wlaw, double alpha);
double integral_r1_closed(const BSFunctions& bs, int m, double alpha);

// integral of r2 over gamma, by two independent routes that must agree:
//   gamma_quadrature: integrate r2(gamma) over a truncated gamma range
//   reduced: collapse the gamma integral analytically first (rho drops out)
enum class R2Route { gamma_quadrature, reduced };
double integral_r2(const BSFunctions& bs, double rho, const WLaw& wlaw,
                   double alpha, const QuadratureSpec& spec, R2Route route);
double integral_r2(const BSFunctions& bs, double rho, int m, double alpha,
                   const QuadratureSpec& spec, R2Route route);

// a-priori bound for the reduced integrand: |integral_r2| <= 2 d E(W)
double integral_r2_bound(const BSFunctions& bs, const WLaw& wlaw);

// g = lambda * integral(r1) + (1 - lambda) * integral(r2)
double g_objective(const BSFunctions& bs, double lambda, double rho,
                   const WLaw& wlaw, double alpha, const QuadratureSpec& spec,
                   R2Route route = R2Route::reduced);
double g_objective(const BSFunctions& bs, double lambda, double rho, int m,
                   double alpha, const QuadratureSpec& spec,
                   R2Route route = R2Route::reduced);

RiskCurve risk_curve(const BSFunctions& bs, double rho, const WLaw& wlaw,
                     double alpha, double gamma_lo, double gamma_hi,
                     int n_points, const QuadratureSpec& spec);
RiskCurve risk_curve(const BSFunctions& bs, double rho, int m, double alpha,
                     double gamma_lo, double gamma_hi, int n_points,
                     const QuadratureSpec& spec);

}  // namespace cirisk
