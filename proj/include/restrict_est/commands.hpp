#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "restrict_est/config.hpp"

namespace restrict_est {

/// Each command writes its outputs under cfg.out_dir (created if missing)
/// together with the effective configuration, and a short log to `log`.

/// estimates.csv: x1,x2,<baseline>,bz,stein,note
void run_estimate(const RunConfig& cfg, const std::filesystem::path& data, std::ostream& log);

struct PsiTableRange {
  std::optional<double> t_min;
  std::optional<double> t_max;
  std::size_t points = 50;
};

/// psi_table.csv. Location grids are linear; scale grids log-spaced.
void run_psi_table(const RunConfig& cfg, const PsiTableRange& range, std::ostream& log);

/// risk.csv, dominance.csv and optionally risk.svg. Returns the number of
/// dominance flags.
std::size_t run_risk_sim(const RunConfig& cfg, bool svg, std::ostream& log);

/// conditions.txt and violations.csv. Returns true when every check holds.
bool run_verify_conditions(const RunConfig& cfg, std::ostream& log);

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Fast invariant suite. Does not write files.
std::vector<CheckResult> run_selfcheck(const RunConfig& cfg, std::ostream& log);

}  // namespace restrict_est
