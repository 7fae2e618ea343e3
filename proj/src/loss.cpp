#include "restrict_est/loss.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace restrict_est {

namespace {

bool near(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool is_undefined_at(const LossSpec& loss, double t) {
  return std::any_of(loss.undefined_points.begin(), loss.undefined_points.end(),
                     [t](double u) { return u == t; });
}

std::string describe(const char* what, double a, double b) {
  std::ostringstream os;
  os << what << " between " << a << " and " << b;
  return os.str();
}

}  // namespace

double LossSpec::kernel_term(double s, double c) const {
  if (orientation == Orientation::location) return w_prime(s - c);
  return s * w_prime(c * s);
}

double LossSpec::loss(double a, double theta) const {
  if (orientation == Orientation::location) return w(a - theta);
  return w(a / theta);
}

LossSpec squared_error_location() {
  LossSpec loss;
  loss.name = "squared-error";
  loss.orientation = Orientation::location;
  loss.w = [](double t) { return t * t; };
  loss.w_prime = [](double t) { return 2.0 * t; };
  loss.pivot = 0.0;
  loss.squared_error = true;
  return loss;
}

LossSpec squared_error_scale() {
  LossSpec loss;
  loss.name = "squared-error";
  loss.orientation = Orientation::scale;
  loss.w = [](double t) { return (t - 1.0) * (t - 1.0); };
  loss.w_prime = [](double t) { return 2.0 * (t - 1.0); };
  loss.pivot = 1.0;
  loss.squared_error = true;
  return loss;
}

LossSpec squared_error(Orientation o) {
  return o == Orientation::location ? squared_error_location() : squared_error_scale();
}

LossSpec custom_loss(std::string name, Orientation orientation, std::function<double(double)> w,
                     std::function<double(double)> w_prime,
                     std::vector<double> undefined_points) {
  LossSpec loss;
  loss.name = std::move(name);
  loss.orientation = orientation;
  loss.w = std::move(w);
  loss.w_prime = std::move(w_prime);
  loss.pivot = orientation == Orientation::location ? 0.0 : 1.0;
  loss.undefined_points = std::move(undefined_points);
  return loss;
}

AssumptionReport check_assumptions(const LossSpec& loss, std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("assumption grid must be non-empty");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw ConfigError("assumption grid must be sorted");
  }

  AssumptionReport report;
  report.grid_used.assign(grid.begin(), grid.end());
  auto flag = [&](double point, std::string what) {
    report.violations.push_back({point, std::move(what)});
  };

  const double p = loss.pivot;
  if (!near(loss.w(p), 0.0)) flag(p, "w(pivot) != 0");

  std::vector<double> w_values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    w_values[k] = loss.w(grid[k]);
    if (w_values[k] < 0.0 && !near(w_values[k], 0.0)) flag(grid[k], "w negative");
  }

  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double a = grid[k];
    const double b = grid[k + 1];
    const double wa = w_values[k];
    const double wb = w_values[k + 1];
    if (b <= p) {
      if (wb > wa && !near(wa, wb)) flag(a, describe("w increases left of pivot", a, b));
      else if (near(wa, wb) && b < p) report.plateaus.push_back(a);
    } else if (a >= p) {
      if (wb < wa && !near(wa, wb)) flag(a, describe("w decreases right of pivot", a, b));
      else if (near(wa, wb) && a > p) report.plateaus.push_back(a);
    }
  }

  // W' non-decreasing across the points where it is defined.
  double prev_t = 0.0;
  double prev_d = 0.0;
  bool have_prev = false;
  for (double t : grid) {
    if (is_undefined_at(loss, t)) continue;
    const double d = loss.w_prime(t);
    if (have_prev && d < prev_d && !near(d, prev_d)) {
      flag(prev_t, describe("w_prime decreases", prev_t, t));
    }
    prev_t = t;
    prev_d = d;
    have_prev = true;
  }

  report.a1_or_a3_ok = report.violations.empty();
  return report;
}

}  // namespace restrict_est
