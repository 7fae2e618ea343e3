#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "restrict_est/common.hpp"
#include "restrict_est/loss.hpp"
#include "restrict_est/models.hpp"

namespace restrict_est {

enum class EstimatorKind { best_equivariant, brewster_zidek, stein_clamped, alpha_family, custom };
std::string_view to_string(EstimatorKind k);

/// Rule X_i - psi(D) (location) or psi(D) X_i (scale).
struct EquivariantEstimator {
  Orientation orientation = Orientation::location;
  Component component = Component::first;
  EstimatorKind kind = EstimatorKind::custom;
  std::string label;
  std::function<double(double)> psi;
  std::map<std::string, double> params;
  /// Informational, e.g. the degenerate normal case.
  std::string note;

  /// Scale estimators need x1 > 0 and x2 > 0 (DomainError otherwise).
  double evaluate(double x1, double x2) const;
  double evaluate(Observation x) const { return evaluate(x.x1, x.x2); }
};

// ---------------------------------------------------------------------------
// Kernel equations

enum class KernelLevel { pdf, cdf };
enum class KernelId { k1, k2, k3, k4, l1, l2, l3, l4 };
std::string_view to_string(KernelId id);
std::string_view to_string(KernelLevel level);

/// k-ids are location, l-ids scale. Odd ids weight by H (cdf), even ids by
/// h (pdf); ids 1-2 target component 1, ids 3-4 component 2.
struct KernelEquation {
  KernelId id;
  Orientation orientation;
  Component component;
  KernelLevel level;
};

KernelEquation kernel_equation(Orientation o, Component i, KernelLevel level);
KernelEquation kernel_equation(KernelId id);

enum class Path { automatic, generic, closed_form };

struct SolveOptions {
  Path path = Path::automatic;
  double root_tol = 1e-11;
  double rel_tol = 1e-11;
  /// Starting point for the bracket search; defaults to c0.
  std::optional<double> hint;
};

/// Normalized kernel value: integral of kernel_term(s, c) against the
/// probability weight K_i(t|s) f_i(s) / M(t). Same sign as the unnormalized
/// k/l kernels; non-increasing in c (location) or non-decreasing (scale).
double kernel_value(const BivariateModel& model, const LossSpec& loss, KernelEquation eq,
                    double t, double c);

/// Root in c of the kernel equation at t (generic quadrature path).
double solve_kernel(const BivariateModel& model, const LossSpec& loss, KernelEquation eq,
                    double t, const SolveOptions& opts = {});

bool closed_form_available(const BivariateModel& model, const LossSpec& loss);

// ---------------------------------------------------------------------------
// psi functions

double best_equivariant_constant(const BivariateModel& model, Component i, const LossSpec& loss,
                                 const SolveOptions& opts = {});
double bz_psi(const BivariateModel& model, Component i, const LossSpec& loss, double t,
              const SolveOptions& opts = {});
double stein_psi(const BivariateModel& model, Component i, const LossSpec& loss, double t,
                 const SolveOptions& opts = {});

enum class ClampOp { max, min };

struct ClampRule {
  Orientation orientation;
  Component component;
  Direction direction;
  ClampOp op;
};

/// Max/min choice of the Stein corollaries, keyed by the ratio direction.
inline constexpr std::array<ClampRule, 8> kClampTable{{
    {Orientation::location, Component::first, Direction::non_decreasing, ClampOp::max},
    {Orientation::location, Component::first, Direction::non_increasing, ClampOp::min},
    {Orientation::location, Component::second, Direction::non_decreasing, ClampOp::max},
    {Orientation::location, Component::second, Direction::non_increasing, ClampOp::min},
    {Orientation::scale, Component::first, Direction::non_decreasing, ClampOp::min},
    {Orientation::scale, Component::first, Direction::non_increasing, ClampOp::max},
    {Orientation::scale, Component::second, Direction::non_decreasing, ClampOp::min},
    {Orientation::scale, Component::second, Direction::non_increasing, ClampOp::max},
}};

/// Throws ConfigError for Direction::indeterminate.
ClampOp clamp_op(Orientation o, Component i, Direction d);
double apply_clamp(ClampOp op, double c0, double psi);

double stein_clamped_psi(const BivariateModel& model, Component i, const LossSpec& loss,
                         double t, Direction direction, const SolveOptions& opts = {});

/// Direction known analytically for the built-in models: normal from the
/// sign of mu_i, CR-gamma from its closed-form kernels. Indeterminate for
/// generic models and for the degenerate normal case.
Direction analytic_direction(const BivariateModel& model, Component i);
/// Normal model with mu_i == 0.
bool degenerate_case(const BivariateModel& model, Component i);

struct PsiRow {
  double t;
  double bz;
  double stein;
  double stein_clamped;
  double c0;
};

/// psi values on a sorted grid, warm-starting each root from its neighbour.
std::vector<PsiRow> psi_table(const BivariateModel& model, Component i, const LossSpec& loss,
                              std::span<const double> t_grid, Direction direction,
                              const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// alpha-families (normal model)

enum class AlphaVariant { smooth, piecewise };
std::string_view to_string(AlphaVariant v);

double alpha_family_psi(const NormalSpec& spec, Component i, AlphaVariant variant, double alpha,
                        double t);
bool alpha_in_dominance_range(const NormalSpec& spec, Component i, double alpha);

// ---------------------------------------------------------------------------
// Closed forms under squared error

namespace closed_form {

double normal_bz(const NormalSpec& spec, Component i, double t);
double normal_stein(const NormalSpec& spec, Component i, double t);

double cr_gamma_bz(Component i, double t);
double cr_gamma_stein(Component i, double t);

/// Individual branches (left: 0 < t < 1, right: t >= 1) evaluated at any
/// t > 0, for continuity checks.
double cr_gamma_bz_branch(Component i, double t, bool right);
double cr_gamma_stein_branch(Component i, double t, bool right);

}  // namespace closed_form

// ---------------------------------------------------------------------------
// Builders

EquivariantEstimator make_best_equivariant(const ModelPtr& model, Component i,
                                           const LossSpec& loss, const SolveOptions& opts = {});
EquivariantEstimator make_brewster_zidek(const ModelPtr& model, Component i, const LossSpec& loss,
                                         const SolveOptions& opts = {});
/// Uses analytic_direction when `direction` is empty.
EquivariantEstimator make_stein_clamped(const ModelPtr& model, Component i, const LossSpec& loss,
                                        std::optional<Direction> direction = std::nullopt,
                                        const SolveOptions& opts = {});
EquivariantEstimator make_alpha_family(const NormalSpec& spec, Component i, AlphaVariant variant,
                                       double alpha);
EquivariantEstimator make_custom(Orientation o, Component i, std::string label,
                                 std::function<double(double)> psi);

}  // namespace restrict_est
