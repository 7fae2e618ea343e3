#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "restrict_est/common.hpp"

namespace restrict_est::numerics {

using RealFunction = std::function<double(double)>;

/// Interval on the extended real line; either end may be infinite.
struct Interval {
  double lo;
  double hi;
};

/// Throws ConfigError unless lo < hi.
Interval make_interval(double lo, double hi);
Interval whole_line();
Interval positive_half_line();

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr double kDefaultAbsTol = 1e-10;
inline constexpr double kDefaultRelTol = 1e-8;
inline constexpr double kDefaultRootTol = 1e-8;
inline constexpr std::size_t kDefaultEvaluationBudget = 1'000'000;

struct QuadratureOptions {
  double abs_tol = kDefaultAbsTol;
  double rel_tol = kDefaultRelTol;
  std::size_t max_evaluations = kDefaultEvaluationBudget;
  /// Interior points where the integrand has kinks or where its mass sits.
  std::span<const double> breakpoints = {};
};

/// The adaptive scheme ran out of evaluations (or hit round-off) before
/// meeting the tolerance. Carries the best estimate reached.
class BudgetExceededError : public NumericError {
 public:
  BudgetExceededError(const std::string& what, QuadratureResult best)
      : NumericError(what), best_(best) {}
  const QuadratureResult& best_estimate() const { return best_; }

 private:
  QuadratureResult best_;
};

class NoRootError : public NumericError {
 public:
  NoRootError(const std::string& what, double lo, double hi)
      : NumericError(what), lo_(lo), hi_(hi) {}
  double searched_lo() const { return lo_; }
  double searched_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature. Infinite endpoints
/// are mapped onto a finite interval (x = a + u/(1-u), x = u/(1-u^2)).
/// Stops when the summed error estimate is <= max(abs_tol, rel_tol*|value|).
QuadratureResult integrate(const RealFunction& f, Interval domain,
                           const QuadratureOptions& options = {});

QuadratureResult integrate(const RealFunction& f, Interval domain,
                           double abs_tol, double rel_tol);

enum class Monotone { non_increasing, non_decreasing };

/// Root of a monotone function. The bracket is found by geometric expansion
/// from `hint`, then refined with Brent's method until the bracket is no
/// wider than `tol` (or g hits zero exactly).
double find_root_monotone(const RealFunction& g, Monotone direction, double hint,
                          double tol = kDefaultRootTol, int max_expansions = 200);

}  // namespace restrict_est::numerics
