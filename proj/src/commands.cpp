#include "restrict_est/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "restrict_est/conditions.hpp"
#include "restrict_est/report.hpp"
#include "restrict_est/risksim.hpp"

namespace restrict_est {

namespace fs = std::filesystem;

namespace {

fs::path prepare_out_dir(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream(dir / "effective.cfg") << serialize(cfg);
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  return out;
}

struct Setup {
  ModelPtr model;
  LossSpec loss;
  Component component;
  SolveOptions opts;
};

Setup setup(const RunConfig& cfg) {
  Setup s{build_model(cfg), build_loss(cfg), target_component(cfg), solve_options(cfg)};
  return s;
}

std::vector<EquivariantEstimator> standard_estimators(const Setup& s) {
  return {make_best_equivariant(s.model, s.component, s.loss, s.opts),
          make_brewster_zidek(s.model, s.component, s.loss, s.opts),
          make_stein_clamped(s.model, s.component, s.loss, std::nullopt, s.opts)};
}

void log_notes(const std::vector<EquivariantEstimator>& ests, std::ostream& log) {
  for (const auto& e : ests) {
    if (!e.note.empty()) log << "note: " << e.label << ": " << e.note << '\n';
  }
}

}  // namespace

void run_estimate(const RunConfig& cfg, const fs::path& data, std::ostream& log) {
  const Setup s = setup(cfg);
  std::ifstream in(data);
  if (!in) throw InputError("cannot open data file '" + data.string() + "'");
  const auto rows = read_observations(in);
  const bool scale = s.model->orientation() == Orientation::scale;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (scale && (!(rows[k].x1 > 0.0) || !(rows[k].x2 > 0.0))) {
      std::ostringstream os;
      os << "data row " << k + 1 << ": scale observations must be strictly positive";
      throw InputError(os.str());
    }
  }
  const auto ests = standard_estimators(s);
  log_notes(ests, log);

  const fs::path dir = prepare_out_dir(cfg);
  auto out = open_out(dir / "estimates.csv");
  out << "x1,x2";
  for (const auto& e : ests) out << ',' << e.label;
  out << ",note\n";
  std::size_t violated = 0;
  for (const auto& r : rows) {
    out << format_number(r.x1) << ',' << format_number(r.x2);
    for (const auto& e : ests) out << ',' << format_number(e.evaluate(r));
    const bool order_violated = r.x1 > r.x2;
    violated += order_violated;
    out << ',' << (order_violated ? "x1>x2" : "") << '\n';
  }
  log << "estimated " << rows.size() << " rows (" << violated << " with x1 > x2) -> "
      << (dir / "estimates.csv").string() << '\n';
}

void run_psi_table(const RunConfig& cfg, const PsiTableRange& range, std::ostream& log) {
  const Setup s = setup(cfg);
  const bool scale = s.model->orientation() == Orientation::scale;
  const double d = s.model->d_scale();
  const double lo = range.t_min.value_or(scale ? 0.02 : -5.0 * d);
  const double hi = range.t_max.value_or(scale ? 50.0 : 5.0 * d);
  if (!(lo < hi)) throw ConfigError("psi table needs t-min < t-max");
  if (scale && !(lo > 0.0)) throw ConfigError("scale psi table needs t-min > 0");
  if (range.points < 2) throw ConfigError("psi table needs at least 2 points");
  std::vector<double> ts(range.points);
  const double last = static_cast<double>(range.points - 1);
  for (std::size_t k = 0; k < range.points; ++k) {
    const double f = static_cast<double>(k) / last;
    ts[k] = scale ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
  }
  ts.front() = lo;
  ts.back() = hi;
  const Direction dir = analytic_direction(*s.model, s.component);
  if (degenerate_case(*s.model, s.component)) {
    log << "note: mu_" << cfg.component << " = 0, every psi equals c0\n";
  }
  const auto rows = psi_table(*s.model, s.component, s.loss, ts, dir, s.opts);
  const fs::path out_dir = prepare_out_dir(cfg);
  auto out = open_out(out_dir / "psi_table.csv");
  write_psi_csv(out, rows);
  log << "wrote " << rows.size() << " rows -> " << (out_dir / "psi_table.csv").string() << '\n';
}

std::size_t run_risk_sim(const RunConfig& cfg, bool svg, std::ostream& log) {
  const Setup s = setup(cfg);
  SimPlan plan;
  plan.model = s.model;
  plan.component = s.component;
  plan.loss = s.loss;
  plan.estimators = standard_estimators(s);
  plan.lambda_grid = default_lambda_grid(*s.model, cfg.grid_points, cfg.lambda_max);
  plan.replications = cfg.replications;
  plan.seed = cfg.seed;
  plan.base_theta1 =
      cfg.base_theta1.value_or(s.model->orientation() == Orientation::location ? 0.0 : 1.0);
  log_notes(plan.estimators, log);

  const RiskCurve curve = simulate(plan, cfg.threads);
  const DominanceReport dom = dominance_report(curve, plan.estimators.front().label);

  const fs::path dir = prepare_out_dir(cfg);
  {
    auto out = open_out(dir / "risk.csv");
    write_risk_csv(out, curve);
  }
  {
    auto out = open_out(dir / "dominance.csv");
    write_dominance_csv(out, dom);
  }
  if (svg) {
    std::ostringstream title;
    title << cfg.model << ", component " << cfg.component << ", " << cfg.replications
          << " replications";
    auto out = open_out(dir / "risk.svg");
    out << risk_svg(curve, title.str());
  }
  log << "simulated " << curve.lambdas.size() << " grid points x " << curve.replications
      << " replications; dominance flags: " << dom.flags << " -> " << (dir / "risk.csv").string()
      << '\n';
  return dom.flags;
}

bool run_verify_conditions(const RunConfig& cfg, std::ostream& log) {
  const Setup s = setup(cfg);
  const ConditionGrids grids = default_grids(*s.model, s.component);
  const ConditionReport pdf =
      check_ratio_monotone(*s.model, s.component, KernelLevel::pdf, grids, cfg.ratio_tol);
  const LemmaCheck lemma =
      check_lemma_implications(pdf, *s.model, s.component, grids, cfg.ratio_tol);
  const Direction expected = analytic_direction(*s.model, s.component);

  std::ostringstream txt;
  auto describe = [&](const ConditionReport& r) {
    txt << to_string(r.quantity) << ": direction " << to_string(r.direction)
        << (r.degenerate ? " (constant in s: degenerate)" : "") << "; violations against "
        << "non-decreasing " << r.violations_non_decreasing << ", non-increasing "
        << r.violations_non_increasing << "; skipped " << r.skipped.size() << '\n';
  };
  txt << "model " << cfg.model << ", component " << cfg.component << '\n';
  txt << "grids: " << grids.delta.size() << " deltas, " << grids.t.size() << " t, "
      << grids.s.size() << " s; tolerance " << format_number(cfg.ratio_tol) << '\n';
  describe(pdf);
  describe(lemma.cdf_ratio);
  describe(lemma.pdf_over_cdf);
  txt << "lemma implications consistent: " << (lemma.consistent ? "yes" : "no") << '\n';
  bool ok = lemma.consistent;
  if (expected != Direction::indeterminate) {
    const bool agree = pdf.direction == expected;
    txt << "analytic direction " << to_string(expected) << ": " << (agree ? "agrees" : "DISAGREES")
        << '\n';
    ok = ok && agree;
  } else if (degenerate_case(*s.model, s.component)) {
    txt << "analytic case: mu_" << cfg.component << " = 0, no improvement available\n";
    ok = ok && pdf.degenerate;
  }

  if (pdf.direction != Direction::indeterminate) {
    const auto bz = make_brewster_zidek(s.model, s.component, s.loss, s.opts);
    const auto st = make_stein_clamped(s.model, s.component, s.loss, pdf.direction, s.opts);
    for (const auto* e : {&bz, &st}) {
      const TheoremReport th =
          check_theorem_hypothesis(*s.model, s.component, s.loss, e->psi, pdf.direction, grids.t);
      txt << "theorem hypothesis for " << e->label << ": sign " << (th.sign_ok ? "ok" : "FAIL")
          << ", monotone " << (th.monotone_ok ? "ok" : "FAIL") << ", limit "
          << (th.limit_ok ? "ok" : "FAIL") << " (psi(t_max) = " << format_number(th.psi_at_max_t)
          << ", c0 = " << format_number(th.c0) << ")\n";
      ok = ok && th.ok();
    }
  }
  txt << "overall: " << (ok ? "PASS" : "FAIL") << '\n';

  const fs::path dir = prepare_out_dir(cfg);
  open_out(dir / "conditions.txt") << txt.str();
  auto csv = open_out(dir / "violations.csv");
  write_violations_csv(csv, {pdf, lemma.cdf_ratio, lemma.pdf_over_cdf});
  log << txt.str();
  return ok;
}

// ---------------------------------------------------------------------------
// selfcheck

namespace {

CheckResult check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

std::string fmt(double v) { return format_number(v); }

CheckResult agreement(const std::string& name, const BivariateModel& model, const LossSpec& loss,
                      const std::vector<double>& ts, double tol) {
  double worst = 0.0;
  bool finite = true;
  SolveOptions g;
  g.path = Path::generic;
  for (int c = 1; c <= 2; ++c) {
    const Component i = component_from_int(c);
    if (degenerate_case(model, i)) continue;
    for (double t : ts) {
      const double a = bz_psi(model, i, loss, t, g);
      const double b = bz_psi(model, i, loss, t);
      const double a2 = stein_psi(model, i, loss, t, g);
      const double b2 = stein_psi(model, i, loss, t);
      finite = finite && std::isfinite(a) && std::isfinite(b) && std::isfinite(a2) &&
               std::isfinite(b2);
      worst = std::max({worst, std::abs(a - b), std::abs(a2 - b2)});
    }
  }
  return check(name, finite && worst <= tol, "max |generic - closed form| = " + fmt(worst));
}

struct Moments {
  double mean, mean_se, var, var_se;
};

Moments sample_moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  const double var = m2 / (n - 1.0);
  m4 /= n;
  return {m, std::sqrt(var / n), var, std::sqrt(std::max(0.0, m4 - var * var) / n)};
}

CheckResult moments_check(const std::string& name, const BivariateModel& model, double mean,
                          double var, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> z1(100000);
  for (double& v : z1) v = model.sample_pivot(rng).z1;
  const Moments m = sample_moments(z1);
  const bool ok = std::abs(m.mean - mean) <= 4.0 * m.mean_se && std::abs(m.var - var) <= 4.0 * m.var_se;
  return check(name, ok, "mean " + fmt(m.mean) + " (expect " + fmt(mean) + "), var " + fmt(m.var) +
                             " (expect " + fmt(var) + ")");
}

CheckResult equivariance_check(const std::vector<EquivariantEstimator>& ests, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  double worst = 0.0;
  for (const auto& e : ests) {
    for (int k = 0; k < 100; ++k) {
      double lhs, rhs;
      if (e.orientation == Orientation::location) {
        const double x1 = u(rng), x2 = u(rng), c = u(rng);
        lhs = e.evaluate(x1 + c, x2 + c);
        rhs = e.evaluate(x1, x2) + c;
      } else {
        const double x1 = pos(rng), x2 = pos(rng), b = pos(rng);
        lhs = e.evaluate(b * x1, b * x2);
        rhs = b * e.evaluate(x1, x2);
      }
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
  }
  return check("equivariance", worst <= 1e-12, "max relative deviation " + fmt(worst));
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  std::vector<CheckResult> results;
  auto guarded = [&](const std::string& name, const std::function<CheckResult()>& fn) {
    try {
      results.push_back(fn());
    } catch (const std::exception& e) {
      results.push_back(check(name, false, std::string("threw: ") + e.what()));
    }
  };

  RunConfig normal_cfg = cfg;
  if (normal_cfg.model != "normal") {
    normal_cfg.model = "normal";
    normal_cfg.orientation.clear();
  }
  std::shared_ptr<const BivariateModel> normal;
  guarded("normal-spec", [&] {
    normal = build_model(normal_cfg);
    auto* nm = dynamic_cast<const NormalModel*>(normal.get());
    const NormalSpec& sp = nm->spec();
    const double a = 1.0 + sp.sigma1() * sp.mu(Component::first) / sp.tau_squared();
    const double b = sp.sigma2() * sp.mu(Component::second) / sp.tau_squared();
    const double dev = std::max(std::abs(a - sp.beta0()), std::abs(b - sp.beta0()));
    return check("normal-spec", dev <= 1e-12 * std::max(1.0, std::abs(sp.beta0())) && std::isfinite(sp.tau()),
                 "beta0 identity deviation " + fmt(dev));
  });
  const auto gamma = cr_gamma_model();
  const LossSpec sq_loc = squared_error_location();
  const LossSpec sq_scale = squared_error_scale();

  guarded("c0", [&] {
    SolveOptions g;
    g.path = Path::generic;
    double dev = 0.0;
    for (int c = 1; c <= 2; ++c) {
      const Component i = component_from_int(c);
      if (normal) dev = std::max(dev, std::abs(best_equivariant_constant(*normal, i, sq_loc, g)));
      dev = std::max(dev, std::abs(best_equivariant_constant(*gamma, i, sq_scale, g) - 1.0 / 3.0));
    }
    return check("c0", dev <= 1e-8, "max deviation from 0 / (1/3): " + fmt(dev));
  });

  if (normal) {
    guarded("normal-agreement", [&] {
      std::vector<double> ts;
      const double tau = normal->d_scale();
      for (int k = 0; k < 12; ++k) ts.push_back(-5.0 * tau + 10.0 * tau * k / 11.0);
      return agreement("normal-agreement", *normal, sq_loc, ts, cfg.agreement_tol);
    });
  }
  guarded("cr-gamma-agreement", [&] {
    std::vector<double> ts;
    for (int k = 0; k < 12; ++k) ts.push_back(0.02 * std::pow(2500.0, k / 11.0));
    return agreement("cr-gamma-agreement", *gamma, sq_scale, ts, cfg.agreement_tol);
  });

  guarded("branch-continuity", [&] {
    double worst = 0.0;
    for (int c = 1; c <= 2; ++c) {
      const Component i = component_from_int(c);
      worst = std::max(worst, std::abs(closed_form::cr_gamma_bz_branch(i, 1.0, false) -
                                       closed_form::cr_gamma_bz_branch(i, 1.0, true)));
      worst = std::max(worst, std::abs(closed_form::cr_gamma_stein_branch(i, 1.0, false) -
                                       closed_form::cr_gamma_stein_branch(i, 1.0, true)));
    }
    return check("branch-continuity", worst <= 1e-12, "max jump at t = 1: " + fmt(worst));
  });

  if (normal) {
    guarded("normal-sampler", [&] {
      const double s1 = normal_cfg.sigma1;
      return moments_check("normal-sampler", *normal, 0.0, s1 * s1, cfg.seed);
    });
  }
  guarded("cr-gamma-sampler",
          [&] { return moments_check("cr-gamma-sampler", *gamma, 2.0, 2.0, cfg.seed + 1); });

  guarded("equivariance", [&] {
    std::vector<EquivariantEstimator> ests;
    for (int c = 1; c <= 2; ++c) {
      const Component i = component_from_int(c);
      if (normal) {
        ests.push_back(make_best_equivariant(normal, i, sq_loc));
        ests.push_back(make_brewster_zidek(normal, i, sq_loc));
        if (!degenerate_case(*normal, i)) ests.push_back(make_stein_clamped(normal, i, sq_loc));
      }
      ests.push_back(make_best_equivariant(gamma, i, sq_scale));
      ests.push_back(make_brewster_zidek(gamma, i, sq_scale));
      ests.push_back(make_stein_clamped(gamma, i, sq_scale));
    }
    return equivariance_check(ests, cfg.seed + 2);
  });

  std::size_t failed = 0;
  for (const auto& r : results) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    failed += !r.passed;
  }
  log << (failed == 0 ? "selfcheck passed" : "selfcheck FAILED") << " (" << results.size() - failed
      << "/" << results.size() << ")\n";
  return results;
}

}  // namespace restrict_est
