#include "restrict_est/risksim.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <sstream>

namespace restrict_est {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct PointResult {
  std::vector<double> mean;
  std::vector<double> std_err;
  std::vector<std::vector<double>> diff_mean;
  std::vector<std::vector<double>> diff_se;
};

// All replications at one lambda. Losses are kept per replication so the
// paired statistics come from a plain two-pass computation.
PointResult run_point(const SimPlan& plan, std::size_t j) {
  const std::size_t n = plan.replications;
  const std::size_t m = plan.estimators.size();
  const Orientation o = plan.model->orientation();
  const double lambda = plan.lambda_grid[j];
  const double theta1 = plan.base_theta1;
  const double theta2 = o == Orientation::location ? theta1 + lambda : theta1 * lambda;
  const double target = plan.component == Component::first ? theta1 : theta2;

  Rng rng(stream_seed(plan.seed, j));
  std::vector<double> losses(n * m);
  for (std::size_t r = 0; r < n; ++r) {
    const Observation x = plan.model->sample(theta1, theta2, rng);
    for (std::size_t e = 0; e < m; ++e) {
      losses[r * m + e] = plan.loss.loss(plan.estimators[e].evaluate(x), target);
    }
  }

  PointResult out;
  out.mean.assign(m, 0.0);
  out.std_err.assign(m, 0.0);
  out.diff_mean.assign(m, std::vector<double>(m, 0.0));
  out.diff_se.assign(m, std::vector<double>(m, 0.0));
  const double dn = static_cast<double>(n);
  for (std::size_t e = 0; e < m; ++e) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += losses[r * m + e];
    const double mu = sum / dn;
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = losses[r * m + e] - mu;
      ss += d * d;
    }
    out.mean[e] = mu;
    out.std_err[e] = std::sqrt(ss / (dn - 1.0)) / std::sqrt(dn);
  }
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      double sum = 0.0;
      for (std::size_t r = 0; r < n; ++r) sum += losses[r * m + a] - losses[r * m + b];
      const double mu = sum / dn;
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = (losses[r * m + a] - losses[r * m + b]) - mu;
        ss += d * d;
      }
      out.diff_mean[a][b] = mu;
      out.diff_se[a][b] = std::sqrt(ss / (dn - 1.0)) / std::sqrt(dn);
    }
  }
  return out;
}

RiskCurve skeleton(const SimPlan& plan) {
  RiskCurve c;
  c.orientation = plan.model->orientation();
  c.component = plan.component;
  c.seed = plan.seed;
  c.base_theta1 = plan.base_theta1;
  c.replications = plan.replications;
  c.lambdas = plan.lambda_grid;
  for (const auto& e : plan.estimators) {
    c.labels.push_back(e.label);
    c.kinds.push_back(e.kind);
  }
  const std::size_t g = plan.lambda_grid.size();
  c.mean.resize(g);
  c.std_err.resize(g);
  c.diff_mean.resize(g);
  c.diff_se.resize(g);
  return c;
}

void store(RiskCurve& c, std::size_t j, PointResult&& p) {
  c.mean[j] = std::move(p.mean);
  c.std_err[j] = std::move(p.std_err);
  c.diff_mean[j] = std::move(p.diff_mean);
  c.diff_se[j] = std::move(p.diff_se);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::size_t j) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0xA5A5A5A5ULL + j));
}

void validate(const SimPlan& plan) {
  if (!plan.model) throw PlanError("simulation plan has no model");
  const Orientation o = plan.model->orientation();
  if (plan.loss.orientation != o) throw PlanError("loss orientation does not match the model");
  if (!plan.loss.w) throw PlanError("simulation plan has no loss function");
  if (plan.estimators.empty()) throw PlanError("simulation plan has no estimators");
  for (const auto& e : plan.estimators) {
    if (e.orientation != o || e.component != plan.component) {
      throw PlanError("estimator '" + e.label + "' does not match the plan orientation/component");
    }
    if (!e.psi) throw PlanError("estimator '" + e.label + "' has no psi function");
  }
  for (std::size_t a = 0; a < plan.estimators.size(); ++a) {
    for (std::size_t b = a + 1; b < plan.estimators.size(); ++b) {
      if (plan.estimators[a].label == plan.estimators[b].label) {
        throw PlanError("duplicate estimator label '" + plan.estimators[a].label + "'");
      }
    }
  }
  if (plan.lambda_grid.empty()) throw PlanError("lambda grid is empty");
  for (double l : plan.lambda_grid) {
    const bool ok = std::isfinite(l) && (o == Orientation::location ? l >= 0.0 : l >= 1.0);
    if (!ok) {
      std::ostringstream os;
      os << "lambda = " << l
         << (o == Orientation::location ? " is invalid: location needs lambda >= 0"
                                        : " is invalid: scale needs lambda >= 1");
      throw PlanError(os.str());
    }
  }
  if (plan.replications < 100) throw PlanError("replications must be at least 100");
  if (!std::isfinite(plan.base_theta1) || (o == Orientation::scale && !(plan.base_theta1 > 0.0))) {
    throw PlanError("base_theta1 must be finite (and positive for scale models)");
  }
}

std::vector<double> default_lambda_grid(const BivariateModel& model, std::size_t points,
                                        std::optional<double> lambda_max) {
  if (points < 2) throw PlanError("lambda grid needs at least 2 points");
  std::vector<double> g(points);
  const double last = static_cast<double>(points - 1);
  if (model.orientation() == Orientation::location) {
    const double hi = lambda_max.value_or(5.0 * model.d_scale());
    if (!(hi > 0.0)) throw PlanError("lambda_max must be positive");
    for (std::size_t k = 0; k < points; ++k) g[k] = hi * static_cast<double>(k) / last;
  } else {
    const double hi = lambda_max.value_or(20.0);
    if (!(hi > 1.0)) throw PlanError("lambda_max must exceed 1 for scale models");
    const double lh = std::log(hi);
    for (std::size_t k = 0; k < points; ++k) g[k] = std::exp(lh * static_cast<double>(k) / last);
    g.front() = 1.0;
    g.back() = hi;
  }
  return g;
}

std::size_t RiskCurve::index_of(const std::string& label) const {
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] == label) return k;
  }
  throw ConfigError("no estimator labelled '" + label + "' in the risk curve");
}

RiskCurve simulate(const SimPlan& plan, int threads) {
  validate(plan);
  RiskCurve c = skeleton(plan);
  const auto g = static_cast<std::ptrdiff_t>(plan.lambda_grid.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
  // Exceptions cannot cross the OpenMP region; keep the first by grid index.
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(g));
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (std::ptrdiff_t j = 0; j < g; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    try {
      store(c, uj, run_point(plan, uj));
    } catch (...) {
      errors[uj] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return c;
}

RiskCurve simulate_serial(const SimPlan& plan) {
  validate(plan);
  RiskCurve c = skeleton(plan);
  for (std::size_t j = 0; j < plan.lambda_grid.size(); ++j) store(c, j, run_point(plan, j));
  return c;
}

DominanceReport dominance_report(const RiskCurve& curve, const std::string& baseline) {
  const std::size_t b = curve.index_of(baseline);
  DominanceReport rep;
  rep.baseline = baseline;
  for (std::size_t e = 0; e < curve.labels.size(); ++e) {
    for (std::size_t j = 0; j < curve.lambdas.size(); ++j) {
      const double dm = e == b ? 0.0 : curve.diff_mean[j][e][b];
      const double ds = e == b ? 0.0 : curve.diff_se[j][e][b];
      const bool flagged = dm > kFlagSigmas * ds && dm > 0.0;
      rep.entries.push_back({curve.labels[e], curve.lambdas[j], dm, ds, flagged});
      if (flagged) ++rep.flags;
    }
  }
  return rep;
}

}  // namespace restrict_est
