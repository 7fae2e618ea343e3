#pragma once

#include <functional>
#include <string>
#include <vector>

#include "restrict_est/estimators.hpp"
#include "restrict_est/loss.hpp"
#include "restrict_est/models.hpp"

namespace restrict_est {

struct ConditionGrids {
  /// Shifts t - delta (location, delta >= 0) or t / delta (scale, delta >= 1).
  std::vector<double> delta;
  std::vector<double> t;
  /// Conditioning values, sorted ascending.
  std::vector<double> s;
};

/// Delta {0,.25,.5,1,2,4} or {1,1.25,1.5,2,4}; 41 t points over +-5 d_scale
/// (location) or log-spaced on (0.02, 50) (scale); 41 quantiles of f_i.
ConditionGrids default_grids(const BivariateModel& model, Component i);

/// Doubles the density of the t and s grids (midpoints inserted).
ConditionGrids refine(const ConditionGrids& g);

inline constexpr double kDefaultRatioTol = 1e-9;

/// Which quantity is tested for monotonicity in s.
enum class RatioQuantity {
  pdf_shift,   // h(t-D|s)/h(t|s)  or h(t/D|s)/h(t|s)
  cdf_shift,   // H(t-D|s)/H(t|s)  or H(t/D|s)/H(t|s)
  pdf_over_cdf // h(t|s)/H(t|s)
};
std::string_view to_string(RatioQuantity q);

struct RatioViolation {
  double delta;  // NaN for pdf_over_cdf
  double t;
  double s_lo;
  double s_hi;
  double log_ratio_lo;
  double log_ratio_hi;
};

struct SkippedPoint {
  double delta;
  double t;
  double s;
};

struct ConditionReport {
  RatioQuantity quantity = RatioQuantity::pdf_shift;
  Component component = Component::first;
  /// Declared only when exactly one direction has no violations.
  Direction direction = Direction::indeterminate;
  /// Neither direction violated: the ratio is constant in s on the grid.
  bool degenerate = false;
  ConditionGrids grids;
  double tolerance = kDefaultRatioTol;
  std::size_t violations_non_decreasing = 0;
  std::size_t violations_non_increasing = 0;
  /// Empty when a direction (or the degenerate case) is declared; otherwise
  /// the violations of the direction with fewer of them.
  std::vector<RatioViolation> violations;
  /// Points where both kernel values underflowed.
  std::vector<SkippedPoint> skipped;

  KernelLevel level() const {
    return quantity == RatioQuantity::pdf_shift ? KernelLevel::pdf : KernelLevel::cdf;
  }
};

/// Adjacent-pair monotonicity in s of the shifted-kernel ratio, compared in
/// log space with absolute tolerance `tol` on the log ratio.
ConditionReport check_ratio_monotone(const BivariateModel& model, Component i, KernelLevel level,
                                     const ConditionGrids& grids, double tol = kDefaultRatioTol);

struct LemmaCheck {
  ConditionReport cdf_ratio;
  ConditionReport pdf_over_cdf;
  /// cdf ratio does not contradict the pdf direction and h/H does not share it.
  bool consistent = false;
};

LemmaCheck check_lemma_implications(const ConditionReport& report_pdf, const BivariateModel& model,
                                    Component i, const ConditionGrids& grids,
                                    double tol = kDefaultRatioTol);

struct TheoremCheckOptions {
  double sign_tol = 1e-9;
  double monotone_tol = 1e-9;
  double limit_tol = 1e-3;
};

struct TheoremPointFailure {
  double t;
  double value;
  std::string what;
};

struct TheoremReport {
  Direction ratio_direction = Direction::indeterminate;
  /// Expected monotonicity of psi in t.
  Direction psi_direction = Direction::indeterminate;
  bool sign_ok = true;
  bool monotone_ok = true;
  bool limit_ok = true;
  double c0 = 0.0;
  double psi_at_max_t = 0.0;
  std::vector<double> t_grid;
  /// Normalized cdf-kernel integral at (t, psi(t)).
  std::vector<double> sign_values;
  std::vector<TheoremPointFailure> failures;

  bool ok() const { return sign_ok && monotone_ok && limit_ok; }
};

/// Sign condition of the dominance theorem at each t, monotonicity of psi on
/// the grid, and psi(max t) against c0. Throws ConfigError for an
/// indeterminate direction.
TheoremReport check_theorem_hypothesis(const BivariateModel& model, Component i,
                                       const LossSpec& loss,
                                       const std::function<double(double)>& psi,
                                       Direction direction, const std::vector<double>& t_grid,
                                       const TheoremCheckOptions& opts = {});

/// psi must be non-increasing for location and non-decreasing for scale when
/// the ratio is non-decreasing; reversed otherwise.
Direction expected_psi_direction(Orientation o, Direction ratio_direction);

}  // namespace restrict_est
