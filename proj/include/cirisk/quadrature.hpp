#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cirisk {

// Knobs for every deterministic integral in the library.  One spec instance
// is shared across the evaluations that must agree with each other at the
// discrete level (e.g. the pivot calibration and the objective derivative),
// so "same spec" is part of several contracts downstream.
struct QuadratureSpec {
  int panels_per_unit = 2;    // panel width <= 1/panels_per_unit
  int nodes_per_panel = 20;   // Gauss-Legendre nodes per panel
  double w_upper = 0.0;       // manual upper truncation for scale integrals; 0 = derive from tail mass
  double gamma_margin = 8.0;  // half-width padding for noncentrality sweeps
  double abs_tol = 1e-7;      // absolute target; node-doubling must agree to this
  bool verify_by_doubling = true;

  QuadratureSpec with_nodes(int n) const {
    QuadratureSpec s = *this;
    s.nodes_per_panel = n;
    return s;
  }
  QuadratureSpec unverified() const {
    QuadratureSpec s = *this;
    s.verify_by_doubling = false;
    return s;
  }
  void validate() const;  // throws InputError on nonsense values
};

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

// n-point rule, computed once (Newton iteration on P_n) and cached.
const GaussLegendreRule& gauss_legendre(int n);

// Partition [lo, hi] into panels no wider than 1/panels_per_unit, with a
// panel edge placed at every interior breakpoint.  Returns the sorted edge
// list, lo and hi included.
std::vector<double> make_panels(double lo, double hi,
                                std::span<const double> breakpoints,
                                int panels_per_unit);

// Abscissae and final weights for a composite rule over the given edges.
struct PanelGrid {
  std::vector<double> x;
  std::vector<double> w;
};
PanelGrid panel_grid(std::span<const double> panel_edges, int nodes_per_panel);

// Single composite pass; throws EvaluationError (with the abscissa in the
// message) if f returns a non-finite value.
double integrate_panels(const std::function<double(double)>& f,
                        std::span<const double> panel_edges,
                        int nodes_per_panel);

// Composite Gauss-Legendre over [lo, hi] honouring spec.  When
// spec.verify_by_doubling is set the integral is recomputed with doubled
// nodes per panel; disagreement beyond spec.abs_tol raises AccuracyError.
// The doubled-node value is returned.
double integrate_1d(const std::function<double(double)>& f, double lo,
                    double hi, const QuadratureSpec& spec,
                    std::span<const double> breakpoints = {});

}  // namespace cirisk
