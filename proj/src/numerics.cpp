#include "restrict_est/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

namespace restrict_est::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod abscissae on [0,1] (symmetric); odd indices are the Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

enum class MapKind { finite, upper_infinite, lower_infinite, both_infinite };

// Maps u in a finite interval to x in the requested domain.
struct DomainMap {
  MapKind kind;
  double lo;
  double hi;

  static DomainMap from(Interval d) {
    const bool lo_inf = std::isinf(d.lo);
    const bool hi_inf = std::isinf(d.hi);
    if (!lo_inf && !hi_inf) return {MapKind::finite, d.lo, d.hi};
    if (!lo_inf) return {MapKind::upper_infinite, d.lo, d.hi};
    if (!hi_inf) return {MapKind::lower_infinite, d.lo, d.hi};
    return {MapKind::both_infinite, d.lo, d.hi};
  }

  double u_lo() const {
    switch (kind) {
      case MapKind::finite: return lo;
      case MapKind::upper_infinite: return 0.0;
      case MapKind::lower_infinite: return 0.0;
      case MapKind::both_infinite: return -1.0;
    }
    return 0.0;
  }
  double u_hi() const { return kind == MapKind::finite ? hi : 1.0; }

  // Returns x(u) and writes dx/du.
  double to_x(double u, double& jac) const {
    switch (kind) {
      case MapKind::finite:
        jac = 1.0;
        return u;
      case MapKind::upper_infinite: {
        const double v = 1.0 - u;
        jac = 1.0 / (v * v);
        return lo + u / v;
      }
      case MapKind::lower_infinite:
        jac = 1.0 / (u * u);
        return hi - (1.0 - u) / u;
      case MapKind::both_infinite: {
        const double v = 1.0 - u * u;
        jac = (1.0 + u * u) / (v * v);
        return u / v;
      }
    }
    jac = 1.0;
    return u;
  }

  double to_u(double x) const {
    switch (kind) {
      case MapKind::finite: return x;
      case MapKind::upper_infinite: return (x - lo) / (1.0 + (x - lo));
      case MapKind::lower_infinite: return 1.0 / (1.0 + (hi - x));
      case MapKind::both_infinite:
        if (x == 0.0) return 0.0;
        return 2.0 * x / (1.0 + std::sqrt(1.0 + 4.0 * x * x));
    }
    return x;
  }
};

struct Panel {
  double a;
  double b;
  double value;
  double error;
};

struct WorseFirst {
  bool operator()(const Panel& l, const Panel& r) const { return l.error < r.error; }
};

class PanelRule {
 public:
  PanelRule(const RealFunction& f, const DomainMap& map) : f_(f), map_(map) {}

  Panel apply(double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = eval(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
      const double dx = half * kXgk[j];
      const double sum = eval(center - dx) + eval(center + dx);
      kronrod += kWgk[j] * sum;
      if (j % 2 == 1) gauss += kWg[j / 2] * sum;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  double eval(double u) {
    double jac = 1.0;
    const double x = map_.to_x(u, jac);
    if (!std::isfinite(x) || !std::isfinite(jac)) {
      // u rounded onto an infinite end; the integrand is taken to vanish there.
      return 0.0;
    }
    const double y = f_(x);
    ++evaluations_;
    if (!std::isfinite(y)) {
      std::ostringstream os;
      os << "integrand returned non-finite value " << y << " at x = " << x;
      throw DomainError(os.str());
    }
    return y == 0.0 ? 0.0 : y * jac;
  }

  const RealFunction& f_;
  const DomainMap& map_;
  std::size_t evaluations_ = 0;
};

bool splittable(const Panel& p) {
  const double mid = 0.5 * (p.a + p.b);
  const double scale = std::max({std::abs(p.a), std::abs(p.b), 1e-300});
  return mid > p.a && mid < p.b && (p.b - p.a) > 8.0 * kEps * scale;
}

}  // namespace

Interval make_interval(double lo, double hi) {
  if (!(lo < hi)) {
    std::ostringstream os;
    os << "invalid interval [" << lo << ", " << hi << "]";
    throw ConfigError(os.str());
  }
  return {lo, hi};
}

Interval whole_line() { return {-kInf, kInf}; }
Interval positive_half_line() { return {0.0, kInf}; }

QuadratureResult integrate(const RealFunction& f, Interval domain, double abs_tol,
                           double rel_tol) {
  QuadratureOptions options;
  options.abs_tol = abs_tol;
  options.rel_tol = rel_tol;
  return integrate(f, domain, options);
}

QuadratureResult integrate(const RealFunction& f, Interval domain,
                           const QuadratureOptions& options) {
  domain = make_interval(domain.lo, domain.hi);
  if (options.abs_tol < 0.0 || options.rel_tol < 0.0 ||
      (options.abs_tol == 0.0 && options.rel_tol == 0.0)) {
    throw ConfigError("quadrature tolerances must be non-negative and not both zero");
  }

  const DomainMap map = DomainMap::from(domain);
  std::vector<double> cuts{map.u_lo(), map.u_hi()};
  if (map.kind != MapKind::finite) {
    const double ulo = map.u_lo();
    const double uhi = map.u_hi();
    for (int k = 1; k < 4; ++k) cuts.push_back(ulo + (uhi - ulo) * k / 4.0);
  }
  for (double x : options.breakpoints) {
    if (x > domain.lo && x < domain.hi && std::isfinite(x)) cuts.push_back(map.to_u(x));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  PanelRule rule(f, map);
  std::priority_queue<Panel, std::vector<Panel>, WorseFirst> active;
  std::vector<Panel> settled;
  double total = 0.0;
  double total_err = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k] < cuts[k + 1])) continue;
    Panel p = rule.apply(cuts[k], cuts[k + 1]);
    total += p.value;
    total_err += p.error;
    active.push(p);
  }

  auto resum = [&] {
    total = 0.0;
    total_err = 0.0;
    auto copy = active;
    while (!copy.empty()) {
      total += copy.top().value;
      total_err += copy.top().error;
      copy.pop();
    }
    for (const Panel& p : settled) {
      total += p.value;
      total_err += p.error;
    }
  };

  std::size_t iteration = 0;
  for (;;) {
    if (total_err <= std::max(options.abs_tol, options.rel_tol * std::abs(total))) break;
    if (active.empty()) {
      resum();
      if (total_err <= std::max(options.abs_tol, options.rel_tol * std::abs(total))) break;
      throw BudgetExceededError("quadrature hit round-off limit before reaching tolerance",
                                {total, total_err, rule.evaluations()});
    }
    if (rule.evaluations() + 30 > options.max_evaluations) {
      resum();
      throw BudgetExceededError("quadrature evaluation budget exceeded",
                                {total, total_err, rule.evaluations()});
    }
    Panel worst = active.top();
    active.pop();
    if (!splittable(worst)) {
      settled.push_back(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = rule.apply(worst.a, mid);
    Panel right = rule.apply(mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    if (++iteration % 64 == 0) resum();
  }
  resum();
  return {total, total_err, rule.evaluations()};
}

double find_root_monotone(const RealFunction& g, Monotone direction, double hint, double tol,
                          int max_expansions) {
  if (!(tol > 0.0)) throw ConfigError("root tolerance must be positive");
  // Work with an increasing function so the bracket logic is one-sided.
  const double sign = direction == Monotone::non_decreasing ? 1.0 : -1.0;
  auto eval = [&](double c) {
    const double v = g(c);
    if (std::isnan(v)) {
      std::ostringstream os;
      os << "root function returned NaN at c = " << c;
      throw DomainError(os.str());
    }
    return sign * v;
  };

  double a = hint;
  double fa = eval(a);
  if (fa == 0.0) return a;

  // Root lies below the hint when the increasing function is already positive.
  const double step_dir = fa > 0.0 ? -1.0 : 1.0;
  double step = 1e-2 * std::max(1.0, std::abs(hint));
  double b = a;
  double fb = fa;
  bool bracketed = false;
  for (int k = 0; k < max_expansions; ++k) {
    b = hint + step_dir * step;
    fb = eval(b);
    if (fb == 0.0) return b;
    if ((fb > 0.0) != (fa > 0.0)) {
      bracketed = true;
      break;
    }
    a = b;
    fa = fb;
    step *= 2.0;
    if (!std::isfinite(step)) break;
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "no sign change found expanding from hint " << hint << " to " << b;
    throw NoRootError(os.str(), std::min(hint, b), std::max(hint, b));
  }

  // Brent's method on [a, b] with fa, fb of opposite sign.
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 500; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      const double s = fb / fa;
      double p;
      double q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = eval(b);
  }
  return b;
}

}  // namespace restrict_est::numerics
