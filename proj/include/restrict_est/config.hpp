#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "restrict_est/estimators.hpp"
#include "restrict_est/loss.hpp"
#include "restrict_est/models.hpp"

namespace restrict_est {

/// Flat `key = value` configuration shared by every subcommand.
struct RunConfig {
  std::string model = "normal";  // normal | cr-gamma
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;
  /// Optional; must agree with the model when given.
  std::string orientation;
  std::string loss = "squared-error";
  int component = 1;
  std::string path = "auto";  // auto | generic | closed-form

  double root_tol = 1e-11;
  double rel_tol = 1e-11;
  double ratio_tol = 1e-9;
  double agreement_tol = 1e-6;

  std::uint64_t seed = 20240917;
  std::size_t replications = 10000;
  std::optional<double> lambda_max;
  std::size_t grid_points = 21;
  std::optional<double> base_theta1;
  /// 0 uses the OpenMP default.
  int threads = 0;

  std::string data;
  std::string out_dir = "out";
};

/// Parses key = value lines; `#` starts a comment. Unknown keys, duplicate
/// keys and bad values raise ConfigError naming the line.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::filesystem::path& path);

/// Round-trips through parse_config to an equal configuration.
std::string serialize(const RunConfig& cfg);
bool operator==(const RunConfig& a, const RunConfig& b);

/// RESTRICT_EST_SEED, when set, replaces the seed.
void apply_env_overrides(RunConfig& cfg);

/// Checks cross-field consistency (orientation vs model, component, tolerances).
void validate(const RunConfig& cfg);

ModelPtr build_model(const RunConfig& cfg);
LossSpec build_loss(const RunConfig& cfg);
Component target_component(const RunConfig& cfg);
SolveOptions solve_options(const RunConfig& cfg);

}  // namespace restrict_est
