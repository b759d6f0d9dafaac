#pragma once

#include <cstdint>

#include "cirisk/design.hpp"
#include "cirisk/interval_family.hpp"
#include "cirisk/numerics.hpp"

namespace cirisk {

struct McOptions {
  long long n_reps = 1000000;
  uint64_t seed = 1;
  int n_threads = 0;     // 0 = hardware concurrency
  int block_size = 8192; // accumulation block; reduce order is fixed by block index
};

struct McEstimate {
  long long n = 0;
  double coverage = 0.0;
  double coverage_se = 0.0;
  double scaled_length = 0.0;    // expected length / expected length of usual
  double scaled_length_se = 0.0;
};

// Samples the canonical reduced problem directly: (U, H) bivariate normal
// with correlation rho and mean (0, gamma), W an independent scale ratio.
// Estimates coverage = 1 - alpha - r2 and scaled length = 1 + r1.
// Identical results for any thread count given the same (seed, n_reps).
McEstimate simulate_risk(const BSFunctions& bs, double gamma, double rho,
                         const WLaw& wlaw, const McOptions& opts);
McEstimate simulate_risk(const BSFunctions& bs, double gamma, double rho,
                         int m, const McOptions& opts);

// Full-pipeline check: draws y = X beta + sigma eps, refits least squares,
// forms the realized interval, and records coverage of a'beta.  Must agree
// with simulate_risk at gamma = c'beta / (sigma sqrt(v22)), rho from X.
struct DesignSimResult {
  McEstimate est;
  Geometry geom;
  double gamma = 0.0;  // noncentrality implied by (beta, sigma)
  double theta = 0.0;  // true target a'beta
};

DesignSimResult simulate_from_design(const DesignProblem& dp,
                                     const Eigen::VectorXd& beta, double sigma,
                                     const BSFunctions& bs,
                                     const McOptions& opts);

}  // namespace cirisk
