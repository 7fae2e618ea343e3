#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "restrict_est/conditions.hpp"
#include "restrict_est/estimators.hpp"
#include "restrict_est/models.hpp"
#include "restrict_est/risksim.hpp"

namespace restrict_est {

/// Malformed or empty input data. CLI exit code 1.
class InputError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Shortest text that round-trips to the same double; locale independent.
std::string format_number(double v);

void write_risk_csv(std::ostream& os, const RiskCurve& curve);
void write_dominance_csv(std::ostream& os, const DominanceReport& report);
void write_psi_csv(std::ostream& os, const std::vector<PsiRow>& rows);
void write_violations_csv(std::ostream& os, const std::vector<ConditionReport>& reports);

/// Self-contained SVG line chart: one polyline per estimator, lambda on x.
std::string risk_svg(const RiskCurve& curve, const std::string& title);

/// Two-column CSV (x1,x2) with a header row. Blank lines are skipped; a
/// malformed row raises InputError naming its line number.
std::vector<Observation> read_observations(std::istream& is);

}  // namespace restrict_est
