#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "restrict_est/common.hpp"

namespace restrict_est {

/// Bowl-shaped loss W with its analytic derivative. Location losses are
/// evaluated at a - theta (minimum at 0); scale losses at a / theta
/// (minimum at 1).
struct LossSpec {
  std::string name;
  Orientation orientation = Orientation::location;
  std::function<double(double)> w;
  std::function<double(double)> w_prime;
  double pivot = 0.0;
  /// Points where w_prime is not defined (measure zero for the integrals).
  std::vector<double> undefined_points;
  bool squared_error = false;

  /// Integrand factor of the kernel equations: W'(s - c) for location,
  /// s * W'(c * s) for scale.
  double kernel_term(double s, double c) const;

  /// Loss of estimate `a` for true parameter `theta`.
  double loss(double a, double theta) const;
};

LossSpec squared_error_location();
LossSpec squared_error_scale();
LossSpec squared_error(Orientation o);

LossSpec custom_loss(std::string name, Orientation orientation, std::function<double(double)> w,
                     std::function<double(double)> w_prime,
                     std::vector<double> undefined_points = {});

struct AssumptionViolation {
  double point;
  std::string description;
};

struct AssumptionReport {
  bool a1_or_a3_ok = true;
  std::vector<double> grid_used;
  std::vector<AssumptionViolation> violations;
  /// Adjacent grid pairs (left point recorded) where w is flat away from the
  /// pivot. Reported, not rejected.
  std::vector<double> plateaus;
};

/// Checks bowl shape and monotone derivative on adjacent grid pairs.
/// Throws ConfigError if the grid is empty or unsorted.
AssumptionReport check_assumptions(const LossSpec& loss, std::span<const double> grid);

}  // namespace restrict_est
