#include "cirisk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <string>

#include "cirisk/errors.hpp"

namespace cirisk {

void QuadratureSpec::validate() const {
  if (panels_per_unit < 1) throw InputError("panels_per_unit must be >= 1");
  if (nodes_per_panel < 2) throw InputError("nodes_per_panel must be >= 2");
  if (nodes_per_panel > 256) throw InputError("nodes_per_panel must be <= 256");
  if (w_upper < 0.0 || !std::isfinite(w_upper))
    throw InputError("w_upper must be finite and >= 0");
  if (!(gamma_margin > 0.0) || !std::isfinite(gamma_margin))
    throw InputError("gamma_margin must be finite and > 0");
  if (!(abs_tol > 0.0) || !std::isfinite(abs_tol))
    throw InputError("abs_tol must be finite and > 0");
}

namespace {

// Nodes are roots of the Legendre polynomial P_n, found by Newton iteration
// from the Chebyshev-like initial guess; weights w_i = 2 / ((1-x^2) P_n'^2).
GaussLegendreRule build_rule(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<size_t>(n));
  rule.weights.resize(static_cast<size_t>(n));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // recurrence: (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one clean-up pass so nodes are converged to full double precision
    {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < n; ++k) {
        double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<size_t>(i)] = -x;  // descending cos -> ascending node
    rule.nodes[static_cast<size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<size_t>(i)] = w;
    rule.weights[static_cast<size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
  if (n < 1 || n > 512) throw InputError("gauss_legendre: order out of range");
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

std::vector<double> make_panels(double lo, double hi,
                                std::span<const double> breakpoints,
                                int panels_per_unit) {
  if (!(lo < hi)) throw InputError("make_panels: need lo < hi");
  std::vector<double> cuts;
  cuts.push_back(lo);
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  // drop near-duplicate cuts; a zero-width panel contributes nothing
  const double eps = (hi - lo) * 1e-12;
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [eps](double a, double b) { return b - a < eps; }),
             cuts.end());
  if (cuts.back() != hi) cuts.back() = hi;

  const double max_width = 1.0 / panels_per_unit;
  std::vector<double> edges;
  edges.push_back(cuts.front());
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const int k = std::max(1, static_cast<int>(std::ceil((b - a) / max_width - 1e-12)));
    for (int j = 1; j <= k; ++j) edges.push_back(a + (b - a) * j / k);
  }
  edges.back() = hi;
  return edges;
}

PanelGrid panel_grid(std::span<const double> panel_edges, int nodes_per_panel) {
  if (panel_edges.size() < 2) throw InputError("panel_grid: need >= 2 edges");
  const GaussLegendreRule& rule = gauss_legendre(nodes_per_panel);
  PanelGrid grid;
  grid.x.reserve((panel_edges.size() - 1) * static_cast<size_t>(nodes_per_panel));
  grid.w.reserve(grid.x.capacity());
  for (size_t p = 0; p + 1 < panel_edges.size(); ++p) {
    const double mid = 0.5 * (panel_edges[p] + panel_edges[p + 1]);
    const double hw = 0.5 * (panel_edges[p + 1] - panel_edges[p]);
    for (int i = 0; i < nodes_per_panel; ++i) {
      grid.x.push_back(mid + hw * rule.nodes[static_cast<size_t>(i)]);
      grid.w.push_back(hw * rule.weights[static_cast<size_t>(i)]);
    }
  }
  return grid;
}

double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> panel_edges,
                        int nodes_per_panel) {
  const PanelGrid grid = panel_grid(panel_edges, nodes_per_panel);
  // Neumaier summation in a fixed order, so results are reproducible
  double sum = 0.0, comp = 0.0;
  for (size_t i = 0; i < grid.x.size(); ++i) {
    const double fx = f(grid.x[i]);
    if (!std::isfinite(fx)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "integrand returned non-finite value at x = " << grid.x[i];
      throw EvaluationError(msg.str());
    }
    const double term = grid.w[i] * fx;
    const double t = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double integrate_1d(const std::function<double(double)>& f, double lo,
                    double hi, const QuadratureSpec& spec,
                    std::span<const double> breakpoints) {
  spec.validate();
  if (lo == hi) return 0.0;
  double sign = 1.0;
  if (lo > hi) {
    std::swap(lo, hi);
    sign = -1.0;
  }
  const std::vector<double> edges =
      make_panels(lo, hi, breakpoints, spec.panels_per_unit);
  const double coarse = integrate_panels(f, edges, spec.nodes_per_panel);
  if (!spec.verify_by_doubling) return sign * coarse;
  const double fine = integrate_panels(f, edges, 2 * spec.nodes_per_panel);
  if (std::abs(fine - coarse) > spec.abs_tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "node-doubling check failed: coarse = " << coarse
        << ", doubled = " << fine << ", |diff| = " << std::abs(fine - coarse)
        << " > abs_tol = " << spec.abs_tol;
    throw AccuracyError(msg.str());
  }
  return sign * fine;
}

}  // namespace cirisk
