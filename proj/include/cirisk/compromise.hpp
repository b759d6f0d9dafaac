#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cirisk/risk.hpp"

namespace cirisk {

// weight mapping lambda in [0, 1) to the trade-off slope between expected
// length and coverage in the combined objective g
double ell(double lambda, const WLaw& wlaw, double alpha);
double ell(double lambda, int m, double alpha);

// lambda chosen so the derivative of the pointwise objective vanishes at the
// usual critical value: ell(lambda) = 2 * integral of phi(t w) w^2 dF_W(w).
// Solved by monotone bracketing + bisection on ell, which is increasing.
struct PivotCalibration {
  double lambda = 0.0;  // the calibrated weight
  double ell = 0.0;     // ell(lambda), equals target by construction
  double target = 0.0;  // 2 * integral of phi(t w) w^2 dF_W
  double t_m = 0.0;
  double e_w = 0.0;
};
PivotCalibration lambda_star(const WLaw& wlaw, double alpha,
                             const QuadratureSpec& spec);
PivotCalibration lambda_star(int m, double alpha, const QuadratureSpec& spec);

// normalized derivative of the constant-s profile of the objective:
// r_prime(s) = ell(lambda) - 2 * integral of phi(s w) w^2 dF_W, increasing in s
double r_prime(double s, double lambda, const WLaw& wlaw, double alpha,
               const QuadratureSpec& spec);
// profile value itself: r(s) = tilde_q(0, s); r(t_m) = 0 by construction
double r_value(double s, double lambda, const WLaw& wlaw, double alpha,
               const QuadratureSpec& spec);

struct ScalarMin {
  double arg = 0.0;
  double value = 0.0;
  bool degenerate = false;
  std::string note;
};

// root of r_prime when it exists; degenerate when ell(lambda) leaves
// (0, sqrt(2/pi)) and the profile has no interior minimum
ScalarMin minimize_r(double lambda, const WLaw& wlaw, double alpha,
                     const QuadratureSpec& spec);

// Pointwise objective for a constant pair (b, s): the per-x integrand of g
// after the noncentrality has been integrated out, folded onto [0, d].
// Two independent routes: 'reduced' collapses the smoothing integral
// analytically (rho drops out); 'psi_smoothing' keeps the inner normal
// smoothing integral explicit.  They must agree for every rho.
enum class TildeQRoute { reduced, psi_smoothing };
double tilde_q(double b, double s, double lambda, double rho, const WLaw& wlaw,
               double alpha, const QuadratureSpec& spec,
               TildeQRoute route = TildeQRoute::reduced);

// minimum of tilde_q over b at fixed s (grid scan + golden-section refine);
// the minimizer is b = 0 for every s
ScalarMin minimize_tilde_q(double s, double lambda, double rho,
                           const WLaw& wlaw, double alpha,
                           const QuadratureSpec& spec, double b_abs_max = 0.0,
                           int n_grid = 41);

// Dominance scan ------------------------------------------------------------

struct DominanceTols {
  double cov_slack = 1e-6;      // coverage may sit this far below 1 - alpha
  double e_slack = 1e-9;        // scaled length may exceed 1 by this much
  double strict_margin = 1e-6;  // required saving to count as "shorter"
};

struct DominanceVerdict {
  bool dominates = false;
  bool covers_everywhere = false;
  bool never_longer = false;
  bool shorter_somewhere = false;
  double min_coverage = 1.0;
  double gamma_at_min_coverage = 0.0;
  double max_scaled_length = 1.0;
  double min_scaled_length = 1.0;
};

// scans the given noncentrality grid (risks are even, so [0, ...] suffices)
DominanceVerdict dominance_check(const BSFunctions& bs, double rho,
                                 const WLaw& wlaw, double alpha,
                                 std::span<const double> gamma_grid,
                                 const DominanceTols& tols,
                                 const QuadratureSpec& spec);

// Random members of the class for the search: 1..max_segments pieces over
// [0, d], each step or linear, with s in [s_lo_frac, s_hi_frac] * t_m and
// |b| <= b_frac * t_m.  Draw index i of a stream keyed by (seed, i).
struct CandidateSampler {
  double d = 0.0;
  double t_m = 0.0;
  int max_segments = 4;
  double s_lo_frac = 0.2;
  double s_hi_frac = 2.0;
  double b_frac = 1.0;

  BSFunctions sample(uint64_t seed, int index) const;
};

struct CandidateRecord {
  int id = 0;
  DominanceVerdict verdict;
  double integral_r1 = 0.0;
  double integral_r2 = 0.0;
  double g_at_lambda_star = 0.0;
};

struct DominanceSearchReport {
  PivotCalibration calib;
  double rho = 0.0;
  double alpha = 0.0;
  int m = 0;  // 0 = known scale
  uint64_t seed = 0;
  std::vector<double> gamma_grid;
  std::vector<CandidateRecord> records;

  int n_dominators() const;
  // most negative g seen (g >= 0 for every class member; 0 is the usual interval)
  double min_g() const;
};

DominanceSearchReport dominance_search(const CandidateSampler& sampler,
                                       int n_candidates, double rho,
                                       const WLaw& wlaw, double alpha,
                                       uint64_t seed,
                                       const DominanceTols& tols,
                                       const QuadratureSpec& spec,
                                       int n_gamma = 81);

}  // namespace cirisk
