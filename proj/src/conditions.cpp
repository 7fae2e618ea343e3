#include "restrict_est/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace restrict_est {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> midpoint_refine(const std::vector<double>& g) {
  std::vector<double> out;
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.push_back(g[k]);
    if (k + 1 < g.size()) out.push_back(0.5 * (g[k] + g[k + 1]));
  }
  return out;
}

void validate(const BivariateModel& model, const ConditionGrids& g, bool need_delta) {
  if (g.t.empty() || g.s.empty() || (need_delta && g.delta.empty())) {
    throw ConfigError("condition grids must be non-empty");
  }
  if (!std::is_sorted(g.s.begin(), g.s.end())) throw ConfigError("s grid must be sorted");
  const bool loc = model.orientation() == Orientation::location;
  for (double d : g.delta) {
    if (loc ? !(d >= 0.0) : !(d >= 1.0)) {
      throw ConfigError(loc ? "location shifts need delta >= 0" : "scale shifts need delta >= 1");
    }
  }
  if (!loc) {
    for (double t : g.t) {
      if (!(t > 0.0)) throw ConfigError("scale t grid must be positive");
    }
  }
}

double log_kernel(const BivariateModel& m, Component i, KernelLevel level, double t, double s) {
  return level == KernelLevel::pdf ? m.log_cond_pdf(i, t, s) : m.log_cond_cdf(i, t, s);
}

// Scans one row of log ratios over the s grid. Returns counts per direction
// and appends to the violation lists.
struct Scan {
  std::size_t up = 0;    // violations of non-decreasing
  std::size_t down = 0;  // violations of non-increasing
  std::vector<RatioViolation> up_list;
  std::vector<RatioViolation> down_list;
};

void scan_row(double delta, double t, const std::vector<double>& s,
              const std::vector<double>& log_ratio, const std::vector<bool>& keep, double tol,
              Scan& out) {
  std::ptrdiff_t prev = -1;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!keep[k]) continue;
    if (prev >= 0) {
      const double a = log_ratio[static_cast<std::size_t>(prev)];
      const double b = log_ratio[k];
      const double d = (a == b) ? 0.0 : b - a;  // equal infinities count as flat
      const RatioViolation v{delta, t, s[static_cast<std::size_t>(prev)], s[k], a, b};
      if (d < -tol) {
        ++out.up;
        out.up_list.push_back(v);
      }
      if (d > tol) {
        ++out.down;
        out.down_list.push_back(v);
      }
    }
    prev = static_cast<std::ptrdiff_t>(k);
  }
}

void finish(ConditionReport& r, Scan& scan) {
  r.violations_non_decreasing = scan.up;
  r.violations_non_increasing = scan.down;
  if (scan.up == 0 && scan.down == 0) {
    r.degenerate = true;
    r.direction = Direction::indeterminate;
  } else if (scan.up == 0) {
    r.direction = Direction::non_decreasing;
  } else if (scan.down == 0) {
    r.direction = Direction::non_increasing;
  } else {
    r.direction = Direction::indeterminate;
    r.violations = scan.up <= scan.down ? std::move(scan.up_list) : std::move(scan.down_list);
  }
}

}  // namespace

std::string_view to_string(RatioQuantity q) {
  switch (q) {
    case RatioQuantity::pdf_shift: return "pdf-ratio";
    case RatioQuantity::cdf_shift: return "cdf-ratio";
    case RatioQuantity::pdf_over_cdf: return "pdf-over-cdf";
  }
  return "?";
}

ConditionGrids default_grids(const BivariateModel& model, Component i) {
  ConditionGrids g;
  constexpr int kPoints = 41;
  if (model.orientation() == Orientation::location) {
    g.delta = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0};
    const double d = model.d_scale();
    for (int k = 0; k < kPoints; ++k) g.t.push_back(-5.0 * d + 10.0 * d * k / (kPoints - 1));
  } else {
    g.delta = {1.0, 1.25, 1.5, 2.0, 4.0};
    const double lo = std::log(0.02);
    const double hi = std::log(50.0);
    for (int k = 0; k < kPoints; ++k) g.t.push_back(std::exp(lo + (hi - lo) * k / (kPoints - 1)));
  }
  for (int k = 0; k < kPoints; ++k) {
    g.s.push_back(model.marginal_quantile(i, (k + 0.5) / kPoints));
  }
  return g;
}

ConditionGrids refine(const ConditionGrids& g) {
  return {g.delta, midpoint_refine(g.t), midpoint_refine(g.s)};
}

ConditionReport check_ratio_monotone(const BivariateModel& model, Component i, KernelLevel level,
                                     const ConditionGrids& grids, double tol) {
  validate(model, grids, true);
  ConditionReport r;
  r.quantity = level == KernelLevel::pdf ? RatioQuantity::pdf_shift : RatioQuantity::cdf_shift;
  r.component = i;
  r.grids = grids;
  r.tolerance = tol;

  const bool loc = model.orientation() == Orientation::location;
  const std::size_t n = grids.s.size();
  std::vector<double> log_ratio(n);
  std::vector<bool> keep(n);
  Scan scan;
  for (double delta : grids.delta) {
    for (double t : grids.t) {
      const double shifted = loc ? t - delta : t / delta;
      for (std::size_t k = 0; k < n; ++k) {
        const double s = grids.s[k];
        const double num = log_kernel(model, i, level, shifted, s);
        const double den = log_kernel(model, i, level, t, s);
        keep[k] = !(num == kNegInf && den == kNegInf);
        if (!keep[k]) {
          r.skipped.push_back({delta, t, s});
          continue;
        }
        log_ratio[k] = num - den;
      }
      scan_row(delta, t, grids.s, log_ratio, keep, tol, scan);
    }
  }
  finish(r, scan);
  return r;
}

LemmaCheck check_lemma_implications(const ConditionReport& report_pdf, const BivariateModel& model,
                                    Component i, const ConditionGrids& grids, double tol) {
  validate(model, grids, true);
  LemmaCheck out;
  out.cdf_ratio = check_ratio_monotone(model, i, KernelLevel::cdf, grids, tol);

  ConditionReport& hz = out.pdf_over_cdf;
  hz.quantity = RatioQuantity::pdf_over_cdf;
  hz.component = i;
  hz.grids = grids;
  hz.tolerance = tol;
  const std::size_t n = grids.s.size();
  std::vector<double> log_ratio(n);
  std::vector<bool> keep(n);
  Scan scan;
  for (double t : grids.t) {
    for (std::size_t k = 0; k < n; ++k) {
      const double s = grids.s[k];
      const double lh = model.log_cond_pdf(i, t, s);
      const double lc = model.log_cond_cdf(i, t, s);
      keep[k] = !(lh == kNegInf && lc == kNegInf);
      if (!keep[k]) {
        hz.skipped.push_back({kNaN, t, s});
        continue;
      }
      log_ratio[k] = lh - lc;
    }
    scan_row(kNaN, t, grids.s, log_ratio, keep, tol, scan);
  }
  finish(hz, scan);

  const Direction d = report_pdf.direction;
  if (d == Direction::indeterminate) {
    // Nothing is implied unless the pdf ratio was constant in s.
    out.consistent = report_pdf.degenerate && out.cdf_ratio.degenerate;
    return out;
  }
  const bool cdf_ok = out.cdf_ratio.direction == d || out.cdf_ratio.degenerate;
  const bool hz_ok = hz.direction == opposite(d) || hz.degenerate;
  out.consistent = cdf_ok && hz_ok;
  return out;
}

Direction expected_psi_direction(Orientation o, Direction ratio_direction) {
  if (ratio_direction == Direction::indeterminate) return Direction::indeterminate;
  return o == Orientation::location ? opposite(ratio_direction) : ratio_direction;
}

TheoremReport check_theorem_hypothesis(const BivariateModel& model, Component i,
                                       const LossSpec& loss,
                                       const std::function<double(double)>& psi,
                                       Direction direction, const std::vector<double>& t_grid,
                                       const TheoremCheckOptions& opts) {
  if (direction == Direction::indeterminate) {
    throw ConfigError("theorem check needs a declared ratio direction");
  }
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw ConfigError("theorem t grid must be non-empty and sorted");
  }
  TheoremReport r;
  r.ratio_direction = direction;
  r.psi_direction = expected_psi_direction(model.orientation(), direction);
  r.t_grid = t_grid;
  r.c0 = best_equivariant_constant(model, i, loss);

  const KernelEquation eq = kernel_equation(model.orientation(), i, KernelLevel::cdf);
  const double sign_tol = opts.sign_tol * std::max(1.0, model.d_scale());
  const bool want_nonneg = direction == Direction::non_decreasing;
  std::vector<double> psis;
  for (double t : t_grid) {
    const double p = psi(t);
    psis.push_back(p);
    const double v = kernel_value(model, loss, eq, t, p);
    r.sign_values.push_back(v);
    if (want_nonneg ? v < -sign_tol : v > sign_tol) {
      r.sign_ok = false;
      r.failures.push_back({t, v, want_nonneg ? "kernel integral negative" : "kernel integral positive"});
    }
  }
  for (std::size_t k = 0; k + 1 < psis.size(); ++k) {
    const double d = psis[k + 1] - psis[k];
    const double slack = opts.monotone_tol * (1.0 + std::abs(psis[k]));
    const bool bad = r.psi_direction == Direction::non_decreasing ? d < -slack : d > slack;
    if (bad) {
      r.monotone_ok = false;
      r.failures.push_back({t_grid[k + 1], psis[k + 1], "psi not monotone in the required direction"});
    }
  }
  r.psi_at_max_t = psis.back();
  if (!(std::abs(r.psi_at_max_t - r.c0) <= opts.limit_tol)) {
    r.limit_ok = false;
    r.failures.push_back({t_grid.back(), r.psi_at_max_t, "psi at the largest t is far from c0"});
  }
  return r;
}

}  // namespace restrict_est
