#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "restrict_est/estimators.hpp"
#include "restrict_est/loss.hpp"
#include "restrict_est/models.hpp"

namespace restrict_est {

/// Invalid simulation plan.
class PlanError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct SimPlan {
  ModelPtr model;
  Component component = Component::first;
  LossSpec loss;
  std::vector<EquivariantEstimator> estimators;
  /// theta2 - theta1 >= 0 (location) or theta2 / theta1 >= 1 (scale).
  std::vector<double> lambda_grid;
  std::size_t replications = 10000;
  std::uint64_t seed = 20240917;
  /// theta1; theta2 = theta1 + lambda or theta1 * lambda.
  double base_theta1 = 0.0;
};

/// Throws PlanError on an inconsistent plan.
void validate(const SimPlan& plan);

/// Location: `points` on [0, lambda_max] (default 5 d_scale).
/// Scale: `points` log-spaced on [1, lambda_max] (default 20).
std::vector<double> default_lambda_grid(const BivariateModel& model, std::size_t points = 21,
                                        std::optional<double> lambda_max = std::nullopt);

/// RNG seed of grid point j: a pure function of (seed, j).
std::uint64_t stream_seed(std::uint64_t seed, std::size_t j);

struct RiskCurve {
  Orientation orientation = Orientation::location;
  Component component = Component::first;
  std::uint64_t seed = 0;
  double base_theta1 = 0.0;
  std::size_t replications = 0;
  std::vector<double> lambdas;
  std::vector<std::string> labels;
  std::vector<EstimatorKind> kinds;
  /// [lambda][estimator]
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> std_err;
  /// Paired loss differences on common draws: [lambda][a][b] for loss_a - loss_b.
  std::vector<std::vector<std::vector<double>>> diff_mean;
  std::vector<std::vector<std::vector<double>>> diff_se;

  /// Throws ConfigError for an unknown label.
  std::size_t index_of(const std::string& label) const;
};

/// Grid points run in parallel (OpenMP); output does not depend on the
/// thread count. `threads` = 0 keeps the OpenMP default.
RiskCurve simulate(const SimPlan& plan, int threads = 0);

/// Single-threaded reference implementation; bit-identical to simulate.
RiskCurve simulate_serial(const SimPlan& plan);

inline constexpr double kFlagSigmas = 3.0;

struct DominanceEntry {
  std::string estimator;
  double lambda;
  double diff_mean;  // estimator - baseline
  double diff_se;
  bool flagged;      // diff_mean > 3 paired standard errors
};

struct DominanceReport {
  std::string baseline;
  std::vector<DominanceEntry> entries;
  std::size_t flags = 0;
};

DominanceReport dominance_report(const RiskCurve& curve, const std::string& baseline);

}  // namespace restrict_est
