// command-line front end: evaluates confidence procedures built from a
// data-dependent recentring b and width s, their coverage/length risks,
// the compromise objective, and the dominance search over the class
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cirisk/compromise.hpp"
#include "cirisk/errors.hpp"
#include "cirisk/io.hpp"
#include "cirisk/mc_sim.hpp"
#include "cirisk/risk.hpp"
#include "cirisk/version.hpp"

using nlohmann::json;
using namespace cirisk;

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = v[static_cast<size_t>(i)];
  return out;
}

struct QuadOpts {
  QuadratureSpec spec;
  bool no_verify = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--abs-tol", spec.abs_tol,
                    "tolerance for the node-doubling self-check")
        ->capture_default_str();
    cmd->add_option("--nodes", spec.nodes_per_panel, "quadrature nodes per panel")
        ->capture_default_str();
    cmd->add_option("--panels-per-unit", spec.panels_per_unit,
                    "panel density per unit length")
        ->capture_default_str();
    cmd->add_option("--w-upper", spec.w_upper,
                    "override the upper truncation of the scale range");
    cmd->add_option("--gamma-margin", spec.gamma_margin,
                    "extra noncentrality range beyond d * w_hi")
        ->capture_default_str();
    cmd->add_flag("--no-verify", no_verify,
                  "skip the node-doubling verification pass");
  }

  QuadratureSpec resolve() const {
    QuadratureSpec s = spec;
    s.verify_by_doubling = !no_verify;
    s.validate();
    return s;
  }
};

struct LawOpts {
  int m = 5;
  bool known = false;

  void attach(CLI::App* cmd) {
    auto* mopt = cmd->add_option("--m", m, "residual degrees of freedom")
                     ->check(CLI::PositiveNumber)
                     ->capture_default_str();
    auto* kopt = cmd->add_flag("--known", known,
                               "treat the error scale as known (z replaces t)");
    mopt->excludes(kopt);
    kopt->excludes(mopt);
  }

  WLaw law() const { return known ? WLaw::known_sigma() : WLaw(m); }
  std::string tag() const { return known ? "known" : "m=" + std::to_string(m); }
};

struct MemberOpts {
  std::string bs_file;
  bool usual = false;
  bool naive = false;
  double naive_q = 0.0;

  void attach(CLI::App* cmd) {
    auto* grp = cmd->add_option_group("procedure", "which class member to use");
    grp->add_option("--bs", bs_file,
                    "json file with the piecewise (b, s) description");
    grp->add_flag("--usual", usual, "the standard interval: b = 0, s = t");
    grp->add_flag("--naive", naive,
                  "pre-test member: assume tau = 0 while |x| < q");
    grp->require_option(1);
    cmd->add_option("--naive-q", naive_q,
                    "pre-test threshold (default: the critical value)")
        ->check(CLI::PositiveNumber);
  }

  BSFunctions resolve(const WLaw& wlaw, double alpha, double rho) const {
    if (!bs_file.empty()) {
      std::ifstream in(bs_file);
      if (!in) throw InputError("cannot open member file: " + bs_file);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw InputError("member file " + bs_file + " is not valid json: " +
                         e.what());
      }
      return BSFunctions::from_json(j);
    }
    if (usual) return usual_interval(wlaw, alpha);
    const double q = naive_q > 0.0 ? naive_q : wlaw.critical(alpha);
    return naive_pretest(q, rho, wlaw, alpha);
  }

  std::string tag() const {
    if (!bs_file.empty()) return "bs=" + bs_file;
    return usual ? "usual" : "naive";
  }
};

DesignProblem load_design(const std::string& design_file, const std::string& a,
                          const std::string& c) {
  DesignProblem dp;
  dp.X = to_matrix(read_csv(design_file));
  dp.a = to_eigen(parse_double_list(a));
  dp.c = to_eigen(parse_double_list(c));
  return dp;
}

json geometry_json(const Geometry& g) {
  return {{"v11", g.v11}, {"v22", g.v22}, {"v12", g.v12},
          {"rho", g.rho}, {"m", g.m}};
}

json member_json(const BSFunctions& bs) {
  return {{"label", bs.label()},
          {"d", bs.d()},
          {"t_m", bs.t_m()},
          {"segments", bs.segments().size()}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw InputError("cannot open output file: " + path);
  return file;
}

// ---------------------------------------------------------------------------

int run_geometry(const std::string& design_file, const std::string& a,
                 const std::string& c) {
  const Geometry g = compute_geometry(load_design(design_file, a, c));
  emit(geometry_json(g));
  return 0;
}

int run_interval(const std::string& design_file, const std::string& y_file,
                 const std::string& a, const std::string& c, double alpha,
                 const MemberOpts& member) {
  const DesignProblem dp = load_design(design_file, a, c);
  const Geometry geom = compute_geometry(dp);
  const Eigen::VectorXd y = to_vector(read_csv(y_file));
  const SufficientStats stats = sufficient_stats(dp, y);
  const WLaw wlaw(geom.m);
  const BSFunctions bs = member.resolve(wlaw, alpha, geom.rho);
  const IntervalRealization iv = evaluate_interval(bs, stats, geom);
  emit({{"geometry", geometry_json(geom)},
        {"stats",
         {{"theta_hat", stats.theta_hat},
          {"tau_hat", stats.tau_hat},
          {"sigma_hat", stats.sigma_hat},
          {"x_stat", stats.x_stat}}},
        {"member", member_json(bs)},
        {"alpha", alpha},
        {"interval",
         {{"lower", iv.lower},
          {"upper", iv.upper},
          {"center", iv.center},
          {"half_width", iv.half_width}}}});
  return 0;
}

int run_curve(const LawOpts& law, const MemberOpts& member,
              const QuadOpts& quad, double alpha, double rho,
              double gamma_max, int points, const std::string& out) {
  const WLaw wlaw = law.law();
  const BSFunctions bs = member.resolve(wlaw, alpha, rho);
  const RiskCurve curve = risk_curve(bs, rho, wlaw, alpha, 0.0, gamma_max,
                                     points, quad.resolve());
  std::ostringstream cfg;
  cfg << "curve " << member.tag() << " " << law.tag() << " alpha=" << alpha
      << " rho=" << rho << " gamma_max=" << gamma_max << " points=" << points;
  std::ofstream file;
  std::ostream& os = open_out(out, file);
  write_risk_curve_csv(os, curve, provenance_line(cfg.str(), 0));
  if (&os != &std::cout) {
    emit({{"file", out},
          {"points", curve.points.size()},
          {"min_coverage", curve.min_coverage()},
          {"max_scaled_length", curve.max_scaled_length()},
          {"min_scaled_length", curve.min_scaled_length()}});
  }
  return 0;
}

int run_lambda_star(const LawOpts& law, const QuadOpts& quad, double alpha) {
  const PivotCalibration cal = lambda_star(law.law(), alpha, quad.resolve());
  emit({{"lambda_star", cal.lambda},
        {"ell", cal.ell},
        {"target", cal.target},
        {"t_m", cal.t_m},
        {"e_w", cal.e_w}});
  return 0;
}

int run_verify_minimizer(const LawOpts& law, const QuadOpts& quad, double alpha,
                         double rho) {
  const WLaw wlaw = law.law();
  const QuadratureSpec spec = quad.resolve();
  const PivotCalibration cal = lambda_star(wlaw, alpha, spec);
  const double t = cal.t_m;

  json checks = json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, double value, double tol) {
    const bool pass = std::abs(value) <= tol;
    all_pass = all_pass && pass;
    checks.push_back(
        {{"check", name}, {"value", value}, {"tol", tol}, {"pass", pass}});
  };

  // at the calibrated weight the width profile is stationary exactly at t
  record("derivative_at_t", r_prime(t, cal.lambda, wlaw, alpha, spec), 1e-9);
  const ScalarMin sm = minimize_r(cal.lambda, wlaw, alpha, spec);
  record("width_minimizer_minus_t", sm.degenerate ? INFINITY : sm.arg - t,
         1e-6);
  record("profile_minimum_value", sm.degenerate ? INFINITY : sm.value, 1e-9);

  // centering is optimal at every width, and (0, t) is the global minimum
  double worst_b = 0.0;
  for (double sf : {0.7, 1.0, 1.3}) {
    const ScalarMin mb =
        minimize_tilde_q(sf * t, cal.lambda, rho, wlaw, alpha, spec);
    worst_b = std::max(worst_b, std::abs(mb.arg));
  }
  record("max_offcentering_of_minimizer", worst_b, 1e-5);

  double min_q = 0.0;
  for (double bf : {0.0, 0.4, 0.8}) {
    for (double sf : {0.5, 0.8, 1.0, 1.3, 1.8}) {
      const double q =
          tilde_q(bf * t, sf * t, cal.lambda, rho, wlaw, alpha, spec);
      min_q = std::min(min_q, q);
    }
  }
  record("pointwise_objective_below_zero", min_q, 1e-8);

  emit({{"lambda_star", cal.lambda},
        {"target", cal.target},
        {"t_m", t},
        {"rho", rho},
        {"checks", checks},
        {"all_pass", all_pass}});
  return all_pass ? 0 : 1;
}

int run_dominance(const LawOpts& law, const QuadOpts& quad, double alpha,
                  double rho, int n_candidates, uint64_t seed, int gamma_points,
                  int max_segments, double g_tol, const std::string& out) {
  const WLaw wlaw = law.law();
  CandidateSampler sampler;
  sampler.t_m = wlaw.critical(alpha);
  sampler.d = sampler.t_m;
  sampler.max_segments = max_segments;
  const DominanceSearchReport rep =
      dominance_search(sampler, n_candidates, rho, wlaw, alpha, seed, {},
                       quad.resolve(), gamma_points);

  if (!out.empty()) {
    std::ostringstream cfg;
    cfg << "dominance " << law.tag() << " alpha=" << alpha << " rho=" << rho
        << " n=" << n_candidates << " gamma_points=" << gamma_points
        << " max_segments=" << max_segments;
    std::ofstream file;
    std::ostream& os = open_out(out, file);
    write_dominance_report_jsonl(os, rep, provenance_line(cfg.str(), seed));
  }

  json dominators = json::array();
  for (const CandidateRecord& r : rep.records)
    if (r.verdict.dominates) dominators.push_back(r.id);
  const bool ok = rep.n_dominators() == 0 && rep.min_g() >= -g_tol;
  emit({{"n_candidates", n_candidates},
        {"n_dominators", rep.n_dominators()},
        {"dominator_ids", dominators},
        {"min_g", rep.min_g()},
        {"g_tol", g_tol},
        {"lambda_star", rep.calib.lambda},
        {"gamma_max", rep.gamma_grid.back()},
        {"seed", seed},
        {"ok", ok}});
  return ok ? 0 : 1;
}

int run_simulate(const LawOpts& law, const MemberOpts& member, double alpha,
                 double rho, double gamma, const std::string& design_file,
                 const std::string& a, const std::string& c,
                 const std::string& beta_list, double sigma,
                 const McOptions& opts) {
  if (design_file.empty()) {
    const WLaw wlaw = law.law();
    const BSFunctions bs = member.resolve(wlaw, alpha, rho);
    const McEstimate est = simulate_risk(bs, gamma, rho, wlaw, opts);
    emit({{"mode", "canonical"},
          {"gamma", gamma},
          {"rho", rho},
          {"member", member_json(bs)},
          {"n", est.n},
          {"seed", opts.seed},
          {"coverage", est.coverage},
          {"coverage_se", est.coverage_se},
          {"scaled_length", est.scaled_length},
          {"scaled_length_se", est.scaled_length_se}});
    return 0;
  }
  if (beta_list.empty())
    throw InputError("--design also needs --beta and --sigma");
  const DesignProblem dp = load_design(design_file, a, c);
  const Geometry geom = compute_geometry(dp);
  const BSFunctions bs = member.resolve(WLaw(geom.m), alpha, geom.rho);
  const Eigen::VectorXd beta = to_eigen(parse_double_list(beta_list));
  const DesignSimResult res = simulate_from_design(dp, beta, sigma, bs, opts);
  emit({{"mode", "design"},
        {"geometry", geometry_json(geom)},
        {"gamma", res.gamma},
        {"theta", res.theta},
        {"member", member_json(bs)},
        {"n", res.est.n},
        {"seed", opts.seed},
        {"coverage", res.est.coverage},
        {"coverage_se", res.est.coverage_se},
        {"scaled_length", res.est.scaled_length},
        {"scaled_length_se", res.est.scaled_length_se}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage/length risk toolkit for data-dependent confidence "
               "intervals (version " + std::string(kVersion) + ")"};
  app.require_subcommand(1);

  std::function<int()> action;

  // geometry ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "geometry", "design constants (v11, v22, rho, df) for two contrasts");
    auto design = std::make_shared<std::string>();
    auto a = std::make_shared<std::string>();
    auto c = std::make_shared<std::string>();
    cmd->add_option("--design", *design, "design matrix csv")->required();
    cmd->add_option("--a", *a, "target contrast, comma separated")->required();
    cmd->add_option("--c", *c, "pre-test contrast, comma separated")->required();
    cmd->callback([=, &action] {
      action = [=] { return run_geometry(*design, *a, *c); };
    });
  }

  // interval ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "interval", "realized confidence interval for a'beta on data");
    auto design = std::make_shared<std::string>();
    auto yfile = std::make_shared<std::string>();
    auto a = std::make_shared<std::string>();
    auto c = std::make_shared<std::string>();
    auto alpha = std::make_shared<double>(0.05);
    auto member = std::make_shared<MemberOpts>();
    cmd->add_option("--design", *design, "design matrix csv")->required();
    cmd->add_option("--y", *yfile, "response csv (one column)")->required();
    cmd->add_option("--a", *a, "target contrast")->required();
    cmd->add_option("--c", *c, "pre-test contrast")->required();
    cmd->add_option("--alpha", *alpha, "nominal level")->capture_default_str();
    member->attach(cmd);
    cmd->callback([=, &action] {
      action = [=] { return run_interval(*design, *yfile, *a, *c, *alpha, *member); };
    });
  }

  // curve ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "curve", "coverage and scaled expected length over the noncentrality");
    auto law = std::make_shared<LawOpts>();
    auto member = std::make_shared<MemberOpts>();
    auto quad = std::make_shared<QuadOpts>();
    auto alpha = std::make_shared<double>(0.05);
    auto rho = std::make_shared<double>(0.0);
    auto gamma_max = std::make_shared<double>(8.0);
    auto points = std::make_shared<int>(81);
    auto out = std::make_shared<std::string>("-");
    law->attach(cmd);
    member->attach(cmd);
    quad->attach(cmd);
    cmd->add_option("--alpha", *alpha, "nominal level")->capture_default_str();
    cmd->add_option("--rho", *rho, "correlation of the two contrasts")
        ->required();
    cmd->add_option("--gamma-max", *gamma_max, "largest noncentrality")
        ->capture_default_str();
    cmd->add_option("--points", *points, "grid size")->capture_default_str();
    cmd->add_option("--out", *out, "output csv ('-' = stdout)")
        ->capture_default_str();
    cmd->callback([=, &action] {
      action = [=] {
        return run_curve(*law, *member, *quad, *alpha, *rho, *gamma_max,
                         *points, *out);
      };
    });
  }

  // lambda-star --------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "lambda-star",
        "weight at which the usual width is the optimal constant width");
    auto law = std::make_shared<LawOpts>();
    auto quad = std::make_shared<QuadOpts>();
    auto alpha = std::make_shared<double>(0.05);
    law->attach(cmd);
    quad->attach(cmd);
    cmd->add_option("--alpha", *alpha, "nominal level")->capture_default_str();
    cmd->callback([=, &action] {
      action = [=] { return run_lambda_star(*law, *quad, *alpha); };
    });
  }

  // verify-minimizer ---------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "verify-minimizer",
        "check that (b, s) = (0, t) minimizes the combined objective");
    auto law = std::make_shared<LawOpts>();
    auto quad = std::make_shared<QuadOpts>();
    auto alpha = std::make_shared<double>(0.05);
    auto rho = std::make_shared<double>(0.7);
    law->attach(cmd);
    quad->attach(cmd);
    cmd->add_option("--alpha", *alpha, "nominal level")->capture_default_str();
    cmd->add_option("--rho", *rho, "correlation used for the dual route")
        ->capture_default_str();
    cmd->callback([=, &action] {
      action = [=] { return run_verify_minimizer(*law, *quad, *alpha, *rho); };
    });
  }

  // dominance ----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "dominance", "random search of the class for a dominating procedure");
    auto law = std::make_shared<LawOpts>();
    auto quad = std::make_shared<QuadOpts>();
    auto alpha = std::make_shared<double>(0.05);
    auto rho = std::make_shared<double>(0.7);
    auto n = std::make_shared<int>(50);
    auto seed = std::make_shared<uint64_t>(1);
    auto gp = std::make_shared<int>(81);
    auto max_segments = std::make_shared<int>(4);
    auto g_tol = std::make_shared<double>(1e-8);
    auto out = std::make_shared<std::string>();
    law->attach(cmd);
    quad->attach(cmd);
    cmd->add_option("--alpha", *alpha, "nominal level")->capture_default_str();
    cmd->add_option("--rho", *rho, "correlation of the two contrasts")
        ->capture_default_str();
    cmd->add_option("--n-candidates", *n, "members to draw")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", *seed, "sampler seed")->capture_default_str();
    cmd->add_option("--gamma-points", *gp, "noncentrality grid size")
        ->capture_default_str();
    cmd->add_option("--max-segments", *max_segments, "pieces per candidate")
        ->capture_default_str();
    cmd->add_option("--g-tol", *g_tol,
                    "numerical slack allowed below g = 0")
        ->capture_default_str();
    cmd->add_option("--out", *out, "write the full report (jsonl)");
    cmd->callback([=, &action] {
      action = [=] {
        return run_dominance(*law, *quad, *alpha, *rho, *n, *seed, *gp,
                             *max_segments, *g_tol, *out);
      };
    });
  }

  // simulate -------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand(
        "simulate", "monte carlo check of coverage and scaled length");
    auto law = std::make_shared<LawOpts>();
    auto member = std::make_shared<MemberOpts>();
    auto alpha = std::make_shared<double>(0.05);
    auto rho = std::make_shared<double>(0.0);
    auto gamma = std::make_shared<double>(0.0);
    auto design = std::make_shared<std::string>();
    auto a = std::make_shared<std::string>();
    auto c = std::make_shared<std::string>();
    auto beta = std::make_shared<std::string>();
    auto sigma = std::make_shared<double>(1.0);
    auto mc = std::make_shared<McOptions>();
    mc->n_reps = 200000;
    law->attach(cmd);
    member->attach(cmd);
    cmd->add_option("--alpha", *alpha, "nominal level")->capture_default_str();
    auto* rho_opt =
        cmd->add_option("--rho", *rho, "correlation of the two contrasts");
    auto* gamma_opt = cmd->add_option("--gamma", *gamma,
                                      "noncentrality of the pre-tested contrast");
    auto* design_opt = cmd->add_option(
        "--design", *design, "full-pipeline mode: design matrix csv");
    cmd->add_option("--a", *a, "target contrast (design mode)");
    cmd->add_option("--c", *c, "pre-test contrast (design mode)");
    cmd->add_option("--beta", *beta, "true coefficients (design mode)");
    cmd->add_option("--sigma", *sigma, "true error scale (design mode)")
        ->capture_default_str();
    cmd->add_option("--reps", mc->n_reps, "replications")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--seed", mc->seed, "stream seed")->capture_default_str();
    cmd->add_option("--threads", mc->n_threads,
                    "worker threads (0 = hardware)")
        ->capture_default_str();
    cmd->add_option("--block", mc->block_size, "accumulation block size")
        ->capture_default_str();
    design_opt->excludes(gamma_opt);
    design_opt->excludes(rho_opt);
    cmd->callback([=, &action] {
      action = [=] {
        return run_simulate(*law, *member, *alpha, *rho, *gamma, *design, *a,
                            *c, *beta, *sigma, *mc);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit clean; bad usage is 2
  }

  try {
    return action();
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const AccuracyError& e) {
    std::cerr << "accuracy error: " << e.what() << "\n";
    return 2;
  } catch (const EvaluationError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
