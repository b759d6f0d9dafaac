#include "cirisk/mc_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <utility>
#include <vector>

#include "cirisk/detail/rng.hpp"
#include "cirisk/errors.hpp"

namespace cirisk {

namespace {

struct BlockSums {
  double covered = 0.0;
  double len = 0.0;
  double len_sq = 0.0;
};

double draw_normal(detail::CounterStream& rs) {
  return normal_quantile(rs.uniform());
}

// Marsaglia-Tsang squeeze sampler for Gamma(a, 1), a >= 1
double draw_gamma(detail::CounterStream& rs, double a) {
  const double d = a - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = draw_normal(rs);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rs.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double draw_w(detail::CounterStream& rs, const WLaw& wlaw) {
  if (wlaw.sigma_known()) return 1.0;
  const int m = wlaw.df();
  if (m == 1) return std::abs(draw_normal(rs));
  return std::sqrt(2.0 * draw_gamma(rs, m / 2.0) / m);
}

void check_options(const McOptions& opts) {
  if (opts.n_reps < 1) throw InputError("mc: n_reps must be >= 1");
  if (opts.block_size < 1) throw InputError("mc: block_size must be >= 1");
  if (opts.n_threads < 0) throw InputError("mc: n_threads must be >= 0");
}

int resolve_threads(const McOptions& opts) {
  if (opts.n_threads > 0) return opts.n_threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs rep_body for every replication, accumulating per block; blocks are
// claimed by an atomic ticket but written to fixed slots, so the final
// fixed-order reduction is byte-identical for any thread count.
template <typename RepBody>
McEstimate run_blocks(long long n_reps, int block_size, int n_threads,
                      const RepBody& rep_body) {
  const long long n_blocks = (n_reps + block_size - 1) / block_size;
  std::vector<BlockSums> slots(static_cast<size_t>(n_blocks));
  std::atomic<long long> ticket{0};

  auto worker = [&] {
    for (;;) {
      const long long blk = ticket.fetch_add(1);
      if (blk >= n_blocks) return;
      const long long lo = blk * block_size;
      const long long hi = std::min(n_reps, lo + block_size);
      BlockSums acc;
      for (long long rep = lo; rep < hi; ++rep) {
        const auto [covered, slen] = rep_body(rep);
        acc.covered += covered ? 1.0 : 0.0;
        acc.len += slen;
        acc.len_sq += slen * slen;
      }
      slots[static_cast<size_t>(blk)] = acc;
    }
  };

  const int nt = std::min<long long>(n_threads, n_blocks);
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nt));
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  // Neumaier reduction in block order
  double cov = 0.0, cov_c = 0.0, len = 0.0, len_c = 0.0, lsq = 0.0, lsq_c = 0.0;
  auto add = [](double& sum, double& comp, double term) {
    const double t = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term
                                              : (term - t) + sum;
    sum = t;
  };
  for (const BlockSums& b : slots) {
    add(cov, cov_c, b.covered);
    add(len, len_c, b.len);
    add(lsq, lsq_c, b.len_sq);
  }
  cov += cov_c;
  len += len_c;
  lsq += lsq_c;

  McEstimate est;
  est.n = n_reps;
  const double n = static_cast<double>(n_reps);
  est.coverage = cov / n;
  est.coverage_se = std::sqrt(
      std::max(0.0, est.coverage * (1.0 - est.coverage)) / n);
  est.scaled_length = len / n;
  const double var =
      n > 1.0 ? std::max(0.0, (lsq - len * len / n) / (n - 1.0)) : 0.0;
  est.scaled_length_se = std::sqrt(var / n);
  return est;
}

}  // namespace

McEstimate simulate_risk(const BSFunctions& bs, double gamma, double rho,
                         const WLaw& wlaw, const McOptions& opts) {
  check_options(opts);
  if (!(std::abs(rho) < 1.0)) throw InputError("simulate_risk: requires |rho| < 1");
  if (!std::isfinite(gamma)) throw InputError("simulate_risk: gamma must be finite");
  const double t = bs.t_m();
  const double e_w = wlaw.expected_w();
  const double rc = std::sqrt(1.0 - rho * rho);

  auto rep_body = [&](long long rep) -> std::pair<bool, double> {
    detail::CounterStream rs(opts.seed, static_cast<uint64_t>(rep));
    const double z1 = draw_normal(rs);
    const double z2 = draw_normal(rs);
    const double u = z1;
    const double h = gamma + rho * z1 + rc * z2;
    const double w = draw_w(rs, wlaw);
    const double x = h / w;
    const double sv = bs.s(std::abs(x));
    const bool covered = std::abs(u - w * bs.b(x)) <= w * sv;
    const double slen = w * sv / (t * e_w);
    return {covered, slen};
  };
  return run_blocks(opts.n_reps, opts.block_size, resolve_threads(opts),
                    rep_body);
}

McEstimate simulate_risk(const BSFunctions& bs, double gamma, double rho,
                         int m, const McOptions& opts) {
  return simulate_risk(bs, gamma, rho, WLaw(m), opts);
}

DesignSimResult simulate_from_design(const DesignProblem& dp,
                                     const Eigen::VectorXd& beta, double sigma,
                                     const BSFunctions& bs,
                                     const McOptions& opts) {
  check_options(opts);
  if (beta.size() != dp.X.cols())
    throw DimensionError("simulate_from_design: beta must have length p");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InputError("simulate_from_design: sigma must be finite and > 0");

  DesignSimResult out;
  out.geom = compute_geometry(dp);
  out.theta = dp.a.dot(beta);
  const double tau = dp.c.dot(beta);
  out.gamma = tau / (sigma * std::sqrt(out.geom.v22));

  const double t = bs.t_m();
  const double e_w = expected_w(out.geom.m);
  const double len_scale =
      std::sqrt(out.geom.v11) * sigma * t * e_w;  // expected half-width of usual
  const Eigen::VectorXd mean = dp.X * beta;
  const long long n_rows = dp.X.rows();

  auto rep_body = [&](long long rep) -> std::pair<bool, double> {
    detail::CounterStream rs(opts.seed, static_cast<uint64_t>(rep));
    Eigen::VectorXd y(n_rows);
    for (long long i = 0; i < n_rows; ++i)
      y[i] = mean[i] + sigma * draw_normal(rs);
    const SufficientStats stats = sufficient_stats(dp, y);
    const IntervalRealization iv = evaluate_interval(bs, stats, out.geom);
    const bool covered = iv.lower <= out.theta && out.theta <= iv.upper;
    return {covered, iv.half_width / len_scale};
  };
  out.est = run_blocks(opts.n_reps, opts.block_size, resolve_threads(opts),
                       rep_body);
  return out;
}

}  // namespace cirisk
