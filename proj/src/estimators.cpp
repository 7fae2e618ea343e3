#include "restrict_est/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "restrict_est/numerics.hpp"
#include "restrict_est/special.hpp"

namespace restrict_est {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string_view blee_label(Orientation o) { return o == Orientation::location ? "blee" : "bsee"; }

}  // namespace

std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::best_equivariant: return "best-equivariant";
    case EstimatorKind::brewster_zidek: return "brewster-zidek";
    case EstimatorKind::stein_clamped: return "stein-clamped";
    case EstimatorKind::alpha_family: return "alpha-family";
    case EstimatorKind::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(KernelId id) {
  static constexpr std::string_view names[] = {"k1", "k2", "k3", "k4", "l1", "l2", "l3", "l4"};
  return names[static_cast<int>(id)];
}

std::string_view to_string(KernelLevel level) { return level == KernelLevel::pdf ? "pdf" : "cdf"; }

std::string_view to_string(AlphaVariant v) {
  return v == AlphaVariant::smooth ? "smooth" : "piecewise";
}

double EquivariantEstimator::evaluate(double x1, double x2) const {
  const double xi = component == Component::first ? x1 : x2;
  if (orientation == Orientation::location) return xi - psi(x2 - x1);
  if (!(x1 > 0.0) || !(x2 > 0.0)) {
    std::ostringstream os;
    os << "scale estimator needs positive observations, got (" << x1 << ", " << x2 << ")";
    throw DomainError(os.str());
  }
  return psi(x2 / x1) * xi;
}

// ---------------------------------------------------------------------------
// Kernel equations

KernelEquation kernel_equation(Orientation o, Component i, KernelLevel level) {
  int idx = (i == Component::first ? 0 : 2) + (level == KernelLevel::cdf ? 0 : 1);
  if (o == Orientation::scale) idx += 4;
  return {static_cast<KernelId>(idx), o, i, level};
}

KernelEquation kernel_equation(KernelId id) {
  const int idx = static_cast<int>(id);
  const Orientation o = idx >= 4 ? Orientation::scale : Orientation::location;
  const Component i = (idx % 4) < 2 ? Component::first : Component::second;
  const KernelLevel level = idx % 2 == 0 ? KernelLevel::cdf : KernelLevel::pdf;
  return {id, o, i, level};
}

namespace {

void check_t(Orientation o, double t) {
  if (!std::isfinite(t) || (o == Orientation::scale && !(t > 0.0))) {
    std::ostringstream os;
    os << "psi is undefined at t = " << t
       << (o == Orientation::scale ? " (scale needs t > 0)" : "");
    throw DomainError(os.str());
  }
}

void check_orientation(const BivariateModel& model, const LossSpec& loss) {
  if (model.orientation() != loss.orientation) {
    throw ConfigError("loss orientation does not match the model orientation");
  }
}

// Probability weight s -> K_i(t|s) f_i(s) / M(t), evaluated in log space.
// Values are memoized: root finding re-integrates against the same weight
// with a different c and mostly revisits the same nodes.
class KernelWeight {
 public:
  KernelWeight(const BivariateModel& model, Component i, KernelLevel level, double t)
      : model_(model), i_(i), level_(level), t_(t), support_(model.support(i)) {
    build_breakpoints();
  }

  double log_raw(double s) const {
    const double lk =
        level_ == KernelLevel::cdf ? model_.log_cond_cdf(i_, t_, s) : model_.log_cond_pdf(i_, t_, s);
    if (lk == kNegInf) return kNegInf;
    return lk + model_.log_marginal_pdf(i_, s);
  }

  double operator()(double s) const {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    const double l = log_raw(s);
    const double v = l == kNegInf ? 0.0 : std::exp(l - log_norm_);
    memo_.emplace(s, v);
    return v;
  }

  std::span<const double> breakpoints() const { return breaks_; }
  numerics::Interval support() const { return support_; }

 private:
  bool inside(double s) const { return s > support_.lo && s < support_.hi; }

  void build_breakpoints() {
    std::vector<double> grid = model_.marginal_breakpoints(i_);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() < 2) {
      const double d = model_.d_scale();
      grid = {-d, 0.0, d};
    }
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> finer;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        finer.push_back(grid[k]);
        if (k + 1 < grid.size()) finer.push_back(0.5 * (grid[k] + grid[k + 1]));
      }
      grid = std::move(finer);
    }
    if (std::isfinite(support_.lo)) {
      const double first = grid.front() - support_.lo;
      for (double f : {0.5, 0.25, 0.125, 0.0625}) grid.push_back(support_.lo + f * first);
    }
    std::erase_if(grid, [&](double s) { return !inside(s); });
    std::sort(grid.begin(), grid.end());

    double best = kNegInf;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double l = log_raw(grid[k]);
      if (l > best) {
        best = l;
        arg = k;
      }
    }
    if (best == kNegInf) {
      std::ostringstream os;
      os << "kernel weight vanishes on the whole grid at t = " << t_;
      throw DomainError(os.str());
    }

    // Golden-section refinement of the mode between the neighbours of the
    // best grid point, then a curvature-based width for extra panels.
    double a = arg > 0 ? grid[arg - 1] : (std::isfinite(support_.lo) ? support_.lo : grid[arg] - 1.0);
    double b = arg + 1 < grid.size() ? grid[arg + 1]
                                     : (std::isfinite(support_.hi) ? support_.hi : grid[arg] + 1.0);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a);
    double x2 = a + g * (b - a);
    double f1 = inside(x1) ? log_raw(x1) : kNegInf;
    double f2 = inside(x2) ? log_raw(x2) : kNegInf;
    for (int it = 0; it < 60 && (b - a) > 1e-9 * (1.0 + std::abs(a)); ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + g * (b - a);
        f2 = inside(x2) ? log_raw(x2) : kNegInf;
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - g * (b - a);
        f1 = inside(x1) ? log_raw(x1) : kNegInf;
      }
    }
    const double mode = f1 > f2 ? x1 : x2;
    const double at_mode = std::max(f1, f2);
    if (at_mode > best) best = at_mode;
    breaks_ = grid;
    if (inside(mode)) {
      breaks_.push_back(mode);
      const double h = 1e-4 * (1.0 + std::abs(mode));
      if (inside(mode - h) && inside(mode + h)) {
        const double c2 = (log_raw(mode + h) - 2.0 * log_raw(mode) + log_raw(mode - h)) / (h * h);
        if (std::isfinite(c2) && c2 < 0.0) {
          const double width = 1.0 / std::sqrt(-c2);
          for (double m : {0.5, 1.0, 2.0, 4.0, 8.0}) {
            if (inside(mode - m * width)) breaks_.push_back(mode - m * width);
            if (inside(mode + m * width)) breaks_.push_back(mode + m * width);
          }
        }
      }
    }
    std::sort(breaks_.begin(), breaks_.end());

    numerics::QuadratureOptions opts;
    opts.abs_tol = 1e-300;
    opts.rel_tol = 1e-13;
    opts.breakpoints = breaks_;
    const double shifted =
        numerics::integrate(
            [&](double s) {
              const double l = log_raw(s);
              return l == kNegInf ? 0.0 : std::exp(l - best);
            },
            support_, opts)
            .value;
    if (!(shifted > 0.0)) {
      std::ostringstream os;
      os << "kernel weight has zero mass at t = " << t_;
      throw DomainError(os.str());
    }
    log_norm_ = best + std::log(shifted);
  }

  const BivariateModel& model_;
  Component i_;
  KernelLevel level_;
  double t_;
  numerics::Interval support_;
  std::vector<double> breaks_;
  double log_norm_ = 0.0;
  mutable std::unordered_map<double, double> memo_;
};

double integrate_kernel(const KernelWeight& w, const LossSpec& loss, double c, double abs_tol,
                        double rel_tol) {
  numerics::QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  opts.rel_tol = rel_tol;
  opts.breakpoints = w.breakpoints();
  return numerics::integrate([&](double s) { return loss.kernel_term(s, c) * w(s); }, w.support(),
                             opts)
      .value;
}

numerics::Monotone kernel_monotone(Orientation o) {
  return o == Orientation::location ? numerics::Monotone::non_increasing
                                    : numerics::Monotone::non_decreasing;
}

double kernel_abs_tol(const BivariateModel& model) { return 1e-13 * std::max(1.0, model.d_scale()); }

}  // namespace

double kernel_value(const BivariateModel& model, const LossSpec& loss, KernelEquation eq, double t,
                    double c) {
  check_orientation(model, loss);
  check_t(eq.orientation, t);
  KernelWeight w(model, eq.component, eq.level, t);
  return integrate_kernel(w, loss, c, kernel_abs_tol(model), 1e-11);
}

double solve_kernel(const BivariateModel& model, const LossSpec& loss, KernelEquation eq, double t,
                    const SolveOptions& opts) {
  check_orientation(model, loss);
  check_t(eq.orientation, t);
  KernelWeight w(model, eq.component, eq.level, t);
  const double abs_tol = kernel_abs_tol(model);
  const double hint = opts.hint ? *opts.hint
                                : best_equivariant_constant(model, eq.component, loss,
                                                            {Path::automatic, opts.root_tol,
                                                             opts.rel_tol, std::nullopt});
  return numerics::find_root_monotone(
      [&](double c) { return integrate_kernel(w, loss, c, abs_tol, opts.rel_tol); },
      kernel_monotone(eq.orientation), hint, opts.root_tol);
}

bool closed_form_available(const BivariateModel& model, const LossSpec& loss) {
  if (!loss.squared_error || loss.orientation != model.orientation()) return false;
  return dynamic_cast<const NormalModel*>(&model) != nullptr ||
         dynamic_cast<const CrGammaModel*>(&model) != nullptr;
}

namespace {

bool use_closed_form(const BivariateModel& model, const LossSpec& loss, Path path) {
  switch (path) {
    case Path::generic: return false;
    case Path::automatic: return closed_form_available(model, loss);
    case Path::closed_form:
      if (!closed_form_available(model, loss)) {
        throw ConfigError("no closed form for this model and loss; use the generic path");
      }
      return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// psi functions

double best_equivariant_constant(const BivariateModel& model, Component i, const LossSpec& loss,
                                 const SolveOptions& opts) {
  check_orientation(model, loss);
  if (use_closed_form(model, loss, opts.path)) {
    return model.orientation() == Orientation::location ? 0.0 : 1.0 / 3.0;
  }
  const auto sup = model.support(i);
  const auto breaks = model.marginal_breakpoints(i);
  numerics::QuadratureOptions q;
  q.abs_tol = kernel_abs_tol(model);
  q.rel_tol = opts.rel_tol;
  q.breakpoints = breaks;
  auto g = [&](double c) {
    return numerics::integrate(
               [&](double s) {
                 const double f = model.marginal_pdf(i, s);
                 return f == 0.0 ? 0.0 : loss.kernel_term(s, c) * f;
               },
               sup, q)
        .value;
  };
  const double hint = opts.hint ? *opts.hint : loss.pivot;
  return numerics::find_root_monotone(g, kernel_monotone(model.orientation()), hint,
                                      opts.root_tol);
}

double bz_psi(const BivariateModel& model, Component i, const LossSpec& loss, double t,
              const SolveOptions& opts) {
  check_orientation(model, loss);
  check_t(model.orientation(), t);
  if (use_closed_form(model, loss, opts.path)) {
    if (auto* n = dynamic_cast<const NormalModel*>(&model)) return closed_form::normal_bz(n->spec(), i, t);
    return closed_form::cr_gamma_bz(i, t);
  }
  return solve_kernel(model, loss, kernel_equation(model.orientation(), i, KernelLevel::cdf), t,
                      opts);
}

double stein_psi(const BivariateModel& model, Component i, const LossSpec& loss, double t,
                 const SolveOptions& opts) {
  check_orientation(model, loss);
  check_t(model.orientation(), t);
  if (use_closed_form(model, loss, opts.path)) {
    if (auto* n = dynamic_cast<const NormalModel*>(&model)) {
      return closed_form::normal_stein(n->spec(), i, t);
    }
    return closed_form::cr_gamma_stein(i, t);
  }
  return solve_kernel(model, loss, kernel_equation(model.orientation(), i, KernelLevel::pdf), t,
                      opts);
}

ClampOp clamp_op(Orientation o, Component i, Direction d) {
  for (const ClampRule& r : kClampTable) {
    if (r.orientation == o && r.component == i && r.direction == d) return r.op;
  }
  throw ConfigError(
      "ratio direction is unknown; run verify-conditions to establish it before clamping");
}

double apply_clamp(ClampOp op, double c0, double psi) {
  return op == ClampOp::max ? std::max(c0, psi) : std::min(c0, psi);
}

double stein_clamped_psi(const BivariateModel& model, Component i, const LossSpec& loss, double t,
                         Direction direction, const SolveOptions& opts) {
  const ClampOp op = clamp_op(model.orientation(), i, direction);
  const double c0 = best_equivariant_constant(model, i, loss, opts);
  SolveOptions o = opts;
  if (!o.hint) o.hint = c0;
  return apply_clamp(op, c0, stein_psi(model, i, loss, t, o));
}

bool degenerate_case(const BivariateModel& model, Component i) {
  if (auto* n = dynamic_cast<const NormalModel*>(&model)) return n->spec().degenerate(i);
  return false;
}

Direction analytic_direction(const BivariateModel& model, Component i) {
  if (auto* n = dynamic_cast<const NormalModel*>(&model)) {
    if (n->spec().degenerate(i)) return Direction::indeterminate;
    return n->spec().mu(i) < 0.0 ? Direction::non_decreasing : Direction::non_increasing;
  }
  if (dynamic_cast<const CrGammaModel*>(&model) != nullptr) {
    return i == Component::first ? Direction::non_decreasing : Direction::non_increasing;
  }
  return Direction::indeterminate;
}

std::vector<PsiRow> psi_table(const BivariateModel& model, Component i, const LossSpec& loss,
                              std::span<const double> t_grid, Direction direction,
                              const SolveOptions& opts) {
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw ConfigError("psi table grid must be sorted");
  }
  const double c0 = best_equivariant_constant(model, i, loss, opts);
  const bool degenerate = degenerate_case(model, i);
  std::optional<ClampOp> op;
  if (!degenerate) op = clamp_op(model.orientation(), i, direction);

  std::vector<PsiRow> rows;
  rows.reserve(t_grid.size());
  SolveOptions bz_opts = opts;
  SolveOptions st_opts = opts;
  bz_opts.hint = opts.hint.value_or(c0);
  st_opts.hint = opts.hint.value_or(c0);
  for (double t : t_grid) {
    PsiRow row{t, c0, c0, c0, c0};
    if (!degenerate) {
      row.bz = bz_psi(model, i, loss, t, bz_opts);
      row.stein = stein_psi(model, i, loss, t, st_opts);
      row.stein_clamped = apply_clamp(*op, c0, row.stein);
      bz_opts.hint = row.bz;
      st_opts.hint = row.stein;
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// alpha-families

double alpha_family_psi(const NormalSpec& spec, Component i, AlphaVariant variant, double alpha,
                        double t) {
  check_t(Orientation::location, t);
  const double tau = spec.tau();
  // The family hits c0 = 0 at alpha = 1 (component 1) or alpha = 0 (component 2).
  const double anchor = i == Component::first ? 1.0 : 0.0;
  if (variant == AlphaVariant::smooth) {
    return (anchor - alpha) * tau * special::inverse_mills(t / tau);
  }
  const double right_slope = i == Component::first ? spec.beta0() - 1.0 : spec.beta0();
  const double raw = t < 0.0 ? (alpha - anchor) * t : right_slope * t;
  if (spec.degenerate(i)) return raw;
  const Direction d = spec.mu(i) < 0.0 ? Direction::non_decreasing : Direction::non_increasing;
  return apply_clamp(clamp_op(Orientation::location, i, d), 0.0, raw);
}

bool alpha_in_dominance_range(const NormalSpec& spec, Component i, double alpha) {
  if (spec.degenerate(i)) return false;
  const double anchor = i == Component::first ? 1.0 : 0.0;
  const double b = spec.beta0();
  if (spec.mu(i) < 0.0) return b <= alpha && alpha < anchor;
  return anchor < alpha && alpha <= b;
}

// ---------------------------------------------------------------------------
// Closed forms

namespace closed_form {

double normal_bz(const NormalSpec& spec, Component i, double t) {
  // -(beta0 - 1) tau phi/Phi and -beta0 tau phi/Phi, via sigma_i mu_i / tau.
  const double tau = spec.tau();
  return -spec.sigma(i) * spec.mu(i) / tau * special::inverse_mills(t / tau);
}

double normal_stein(const NormalSpec& spec, Component i, double t) {
  return spec.sigma(i) * spec.mu(i) / spec.tau_squared() * t;
}

namespace {

// 1 - (1+t)^{-k}
double q(double k, double t) { return -std::expm1(-k * std::log1p(t)); }

double bz_left(Component i, double t) {
  if (i == Component::first) {
    const double u = 1.0 / (t + 1.0);
    return (2.0 * t - 1.0 + u * u) / (6.0 * t - 2.0 + 2.0 * u * u * u);
  }
  return q(2, t) / (2.0 * t * q(3, t));
}

double bz_right(Component i, double t) {
  if (i == Component::first) {
    const double u = 1.0 / (t + 1.0);
    const double v = 1.0 / t;
    return (2.0 - v * v + u * u) / (6.0 - 2.0 * v * v * v + 2.0 * u * u * u);
  }
  const double r = t / (1.0 + t);
  return (3.0 - 2.0 / t - r * r) / (8.0 - 6.0 / t - 2.0 * r * r * r);
}

double stein_left(Component i, double t) {
  if (i == Component::first) return q(3, t) / (3.0 * q(4, t));
  return q(3, t) / (3.0 * t * q(4, t));
}

double stein_right(Component i, double t) {
  if (i == Component::first) {
    // (t^-3 - (t+1)^-3) / (t^-4 - (t+1)^-4) = t (1 - r^3) / (1 - r^4), r = t/(t+1)
    const double lr = std::log(t / (t + 1.0));
    return t * -std::expm1(3.0 * lr) / (3.0 * -std::expm1(4.0 * lr));
  }
  const double lr = std::log(t / (t + 1.0));
  return -std::expm1(3.0 * lr) / (3.0 * -std::expm1(4.0 * lr));
}

}  // namespace

double cr_gamma_bz_branch(Component i, double t, bool right) {
  check_t(Orientation::scale, t);
  return right ? bz_right(i, t) : bz_left(i, t);
}

double cr_gamma_stein_branch(Component i, double t, bool right) {
  check_t(Orientation::scale, t);
  return right ? stein_right(i, t) : stein_left(i, t);
}

double cr_gamma_bz(Component i, double t) { return cr_gamma_bz_branch(i, t, t >= 1.0); }

double cr_gamma_stein(Component i, double t) { return cr_gamma_stein_branch(i, t, t >= 1.0); }

}  // namespace closed_form

// ---------------------------------------------------------------------------
// Builders

namespace {

EquivariantEstimator constant_estimator(Orientation o, Component i, EstimatorKind kind,
                                        std::string label, double c0) {
  EquivariantEstimator e;
  e.orientation = o;
  e.component = i;
  e.kind = kind;
  e.label = std::move(label);
  e.psi = [c0](double) { return c0; };
  e.params["c0"] = c0;
  return e;
}

constexpr const char* kDegenerateNote =
    "mu_i = 0: psi reduces to c0, no improvement over the best equivariant estimator";

}  // namespace

EquivariantEstimator make_best_equivariant(const ModelPtr& model, Component i,
                                           const LossSpec& loss, const SolveOptions& opts) {
  const double c0 = best_equivariant_constant(*model, i, loss, opts);
  return constant_estimator(model->orientation(), i, EstimatorKind::best_equivariant,
                            std::string(blee_label(model->orientation())), c0);
}

EquivariantEstimator make_brewster_zidek(const ModelPtr& model, Component i, const LossSpec& loss,
                                         const SolveOptions& opts) {
  const double c0 = best_equivariant_constant(*model, i, loss, opts);
  if (degenerate_case(*model, i)) {
    auto e = constant_estimator(model->orientation(), i, EstimatorKind::brewster_zidek, "bz", c0);
    e.note = kDegenerateNote;
    return e;
  }
  EquivariantEstimator e;
  e.orientation = model->orientation();
  e.component = i;
  e.kind = EstimatorKind::brewster_zidek;
  e.label = "bz";
  e.params["c0"] = c0;
  SolveOptions o = opts;
  if (!o.hint) o.hint = c0;
  e.psi = [model, i, loss, o](double t) { return bz_psi(*model, i, loss, t, o); };
  return e;
}

EquivariantEstimator make_stein_clamped(const ModelPtr& model, Component i, const LossSpec& loss,
                                        std::optional<Direction> direction,
                                        const SolveOptions& opts) {
  const double c0 = best_equivariant_constant(*model, i, loss, opts);
  if (degenerate_case(*model, i)) {
    auto e = constant_estimator(model->orientation(), i, EstimatorKind::stein_clamped, "stein", c0);
    e.note = kDegenerateNote;
    return e;
  }
  const Direction d = direction.value_or(analytic_direction(*model, i));
  const ClampOp op = clamp_op(model->orientation(), i, d);
  EquivariantEstimator e;
  e.orientation = model->orientation();
  e.component = i;
  e.kind = EstimatorKind::stein_clamped;
  e.label = "stein";
  e.params["c0"] = c0;
  e.params["clamp_max"] = op == ClampOp::max ? 1.0 : 0.0;
  SolveOptions o = opts;
  if (!o.hint) o.hint = c0;
  e.psi = [model, i, loss, o, op, c0](double t) {
    return apply_clamp(op, c0, stein_psi(*model, i, loss, t, o));
  };
  return e;
}

EquivariantEstimator make_alpha_family(const NormalSpec& spec, Component i, AlphaVariant variant,
                                       double alpha) {
  EquivariantEstimator e;
  e.orientation = Orientation::location;
  e.component = i;
  e.kind = EstimatorKind::alpha_family;
  e.label = std::string("alpha-") + std::string(to_string(variant));
  e.params["alpha"] = alpha;
  e.params["c0"] = 0.0;
  const bool ok = alpha_in_dominance_range(spec, i, alpha);
  e.params["in_range"] = ok ? 1.0 : 0.0;
  if (!ok) {
    std::ostringstream os;
    os << "alpha = " << alpha << " is outside the dominance range for this model";
    e.note = os.str();
  }
  e.psi = [spec, i, variant, alpha](double t) {
    return alpha_family_psi(spec, i, variant, alpha, t);
  };
  return e;
}

EquivariantEstimator make_custom(Orientation o, Component i, std::string label,
                                 std::function<double(double)> psi) {
  if (!psi) throw ConfigError("custom estimator needs a psi function");
  EquivariantEstimator e;
  e.orientation = o;
  e.component = i;
  e.kind = EstimatorKind::custom;
  e.label = std::move(label);
  e.psi = std::move(psi);
  return e;
}

}  // namespace restrict_est
