#include "restrict_est/models.hpp"

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "restrict_est/special.hpp"

namespace restrict_est {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Unitless panel hints for a location marginal of unit scale.
constexpr double kLocationHints[] = {-12, -8, -6, -5, -4, -3, -2, -1.5, -1, -0.5, 0,
                                     0.5, 1,  1.5, 2,  3,  4,  5,  6,    8,  12};
// ... and for a positive scale marginal of unit scale.
constexpr double kScaleHints[] = {0.05, 0.125, 0.25, 0.5, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48};

double log_or_neg_inf(double v) {
  return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
}

bool within(numerics::Interval iv, double x) { return x > iv.lo && x < iv.hi; }

}  // namespace

Observation apply_theta(Orientation o, Pivot z, double theta1, double theta2) {
  if (o == Orientation::location) return {theta1 + z.z1, theta2 + z.z2};
  return {theta1 * z.z1, theta2 * z.z2};
}

// ---------------------------------------------------------------------------
// BivariateModel defaults

double BivariateModel::log_marginal_pdf(Component i, double s) const {
  return log_or_neg_inf(marginal_pdf(i, s));
}

double BivariateModel::log_cond_pdf(Component i, double t, double s) const {
  return log_or_neg_inf(cond_pdf(i, t, s));
}

double BivariateModel::log_cond_cdf(Component i, double t, double s) const {
  return log_or_neg_inf(cond_cdf(i, t, s));
}

numerics::Interval BivariateModel::d_domain() const {
  return orientation() == Orientation::location ? numerics::whole_line()
                                                : numerics::positive_half_line();
}

double BivariateModel::marginal_quantile(Component i, double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  const numerics::Interval sup = support(i);
  const auto hints = marginal_breakpoints(i);
  auto cdf_minus_p = [&](double x) {
    if (x <= sup.lo) return -p;
    if (x >= sup.hi) return 1.0 - p;
    numerics::QuadratureOptions opts;
    opts.abs_tol = 1e-13;
    opts.rel_tol = 1e-11;
    opts.breakpoints = hints;
    return numerics::integrate([&](double s) { return marginal_pdf(i, s); }, {sup.lo, x}, opts)
               .value -
           p;
  };
  const double hint = orientation() == Orientation::location ? 0.0 : d_scale();
  return numerics::find_root_monotone(cdf_minus_p, numerics::Monotone::non_decreasing, hint,
                                      1e-10);
}

// ---------------------------------------------------------------------------
// Normal

NormalSpec::NormalSpec(double sigma1, double sigma2, double rho)
    : sigma1_(sigma1), sigma2_(sigma2), rho_(rho) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2)) {
    throw ModelError("normal model requires sigma1 > 0 and sigma2 > 0");
  }
  if (!(std::abs(rho) < 1.0)) throw ModelError("normal model requires |rho| < 1");
}

double NormalSpec::mu(Component i) const {
  return i == Component::first ? rho_ * sigma2_ - sigma1_ : sigma2_ - rho_ * sigma1_;
}

double NormalSpec::xi(Component i) const {
  const double root = std::sqrt((1.0 - rho_) * (1.0 + rho_));
  return (i == Component::first ? sigma2_ : sigma1_) * root;
}

double NormalSpec::tau_squared() const {
  // (sigma1 - sigma2)^2 + 2 sigma1 sigma2 (1 - rho): stable as rho -> 1.
  const double d = sigma1_ - sigma2_;
  return d * d + 2.0 * sigma1_ * sigma2_ * (1.0 - rho_);
}

double NormalSpec::tau() const { return std::sqrt(tau_squared()); }

double NormalSpec::beta0() const {
  return (sigma2_ * sigma2_ - rho_ * sigma1_ * sigma2_) / tau_squared();
}

bool NormalSpec::degenerate(Component i) const {
  return std::abs(mu(i)) <= 1e-15 * std::max(sigma1_, sigma2_);
}

double NormalModel::joint_pdf(double z1, double z2) const {
  const double s1 = spec_.sigma1();
  const double s2 = spec_.sigma2();
  const double r = spec_.rho();
  const double one_m_r2 = (1.0 - r) * (1.0 + r);
  const double u = z1 / s1;
  const double v = z2 / s2;
  const double q = (u * u - 2.0 * r * u * v + v * v) / one_m_r2;
  return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * s1 * s2 * std::sqrt(one_m_r2));
}

double NormalModel::marginal_pdf(Component i, double s) const {
  const double sd = spec_.sigma(i);
  return special::normal_pdf(s / sd) / sd;
}

double NormalModel::log_marginal_pdf(Component i, double s) const {
  const double sd = spec_.sigma(i);
  const double z = s / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

numerics::Interval NormalModel::support(Component) const { return numerics::whole_line(); }

double NormalModel::cond_mean(Component i, double s) const {
  return s * spec_.mu(i) / spec_.sigma(i);
}

double NormalModel::cond_pdf(Component i, double t, double s) const {
  const double xi = spec_.xi(i);
  return special::normal_pdf((t - cond_mean(i, s)) / xi) / xi;
}

double NormalModel::cond_cdf(Component i, double t, double s) const {
  return special::normal_cdf((t - cond_mean(i, s)) / spec_.xi(i));
}

double NormalModel::log_cond_pdf(Component i, double t, double s) const {
  const double xi = spec_.xi(i);
  const double z = (t - cond_mean(i, s)) / xi;
  return -0.5 * z * z - std::log(xi) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double NormalModel::log_cond_cdf(Component i, double t, double s) const {
  return special::log_normal_cdf((t - cond_mean(i, s)) / spec_.xi(i));
}

std::vector<double> NormalModel::marginal_breakpoints(Component i) const {
  std::vector<double> out;
  for (double h : kLocationHints) out.push_back(h * spec_.sigma(i));
  return out;
}

double NormalModel::marginal_quantile(Component i, double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  return spec_.sigma(i) * special::normal_quantile(p);
}

Pivot NormalModel::sample_pivot(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double g1 = normal(rng);
  const double g2 = normal(rng);
  const double r = spec_.rho();
  return {spec_.sigma1() * g1,
          spec_.sigma2() * (r * g1 + std::sqrt((1.0 - r) * (1.0 + r)) * g2)};
}

// ---------------------------------------------------------------------------
// Cheriyan-Ramabhadran gamma

double CrGammaModel::joint_pdf(double z1, double z2) const {
  if (!(z1 > 0.0) || !(z2 > 0.0)) return 0.0;
  if (z2 < z1) return std::exp(-z1) * -std::expm1(-z2);
  return std::exp(-z2) * -std::expm1(-z1);
}

double CrGammaModel::marginal_pdf(Component, double s) const {
  return s > 0.0 ? s * std::exp(-s) : 0.0;
}

double CrGammaModel::log_marginal_pdf(Component, double s) const {
  return s > 0.0 ? std::log(s) - s : -std::numeric_limits<double>::infinity();
}

numerics::Interval CrGammaModel::support(Component) const {
  return numerics::positive_half_line();
}

double CrGammaModel::cond_pdf(Component i, double t, double s) const {
  if (!(t > 0.0) || !(s > 0.0)) return 0.0;
  return std::exp(log_cond_pdf(i, t, s));
}

double CrGammaModel::log_cond_pdf(Component i, double t, double s) const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(t > 0.0) || !(s > 0.0)) return kNegInf;
  if (i == Component::first) {
    if (t < 1.0) return std::log(-std::expm1(-s * t));
    return -s * (t - 1.0) + std::log(-std::expm1(-s));
  }
  if (t < 1.0) return s * (1.0 - 1.0 / t) + std::log(-std::expm1(-s)) - 2.0 * std::log(t);
  return std::log(-std::expm1(-s / t)) - 2.0 * std::log(t);
}

double CrGammaModel::cond_cdf(Component i, double t, double s) const {
  if (!(t > 0.0) || !(s > 0.0)) return 0.0;
  if (i == Component::first) {
    if (t < 1.0) return special::exp_defect(s * t) / s;
    return 1.0 - std::exp(-s * (t - 1.0)) * -std::expm1(-s) / s;
  }
  if (t < 1.0) return std::exp(s * (1.0 - 1.0 / t)) * -std::expm1(-s) / s;
  return 1.0 - 1.0 / t + -std::expm1(-s / t) / s;
}

double CrGammaModel::log_cond_cdf(Component i, double t, double s) const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (!(t > 0.0) || !(s > 0.0)) return kNegInf;
  if (i == Component::first) {
    if (t < 1.0) return std::log(special::exp_defect(s * t)) - std::log(s);
    return std::log1p(-std::exp(-s * (t - 1.0)) * -std::expm1(-s) / s);
  }
  if (t < 1.0) return s * (1.0 - 1.0 / t) + std::log(-std::expm1(-s)) - std::log(s);
  return std::log(cond_cdf(i, t, s));
}

std::vector<double> CrGammaModel::marginal_breakpoints(Component) const {
  return {std::begin(kScaleHints), std::end(kScaleHints)};
}

double CrGammaModel::marginal_quantile(Component, double p) const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  return boost::math::quantile(boost::math::gamma_distribution<double>(2.0, 1.0), p);
}

Pivot CrGammaModel::sample_pivot(Rng& rng) const {
  std::exponential_distribution<double> expo(1.0);
  const double y0 = expo(rng);
  const double y1 = expo(rng);
  const double y2 = expo(rng);
  return {y0 + y1, y0 + y2};
}

// ---------------------------------------------------------------------------
// Generic

namespace {

numerics::QuadratureOptions tight_options(std::span<const double> breaks) {
  numerics::QuadratureOptions opts;
  opts.abs_tol = 0.0;
  opts.rel_tol = 1e-11;
  opts.breakpoints = breaks;
  return opts;
}

}  // namespace

GenericModel::GenericModel(JointPdf joint_pdf, Orientation orientation,
                           numerics::Interval support1, numerics::Interval support2,
                           PivotSampler sampler, GenericModelOptions options)
    : pdf_(std::move(joint_pdf)),
      orientation_(orientation),
      support1_(numerics::make_interval(support1.lo, support1.hi)),
      support2_(numerics::make_interval(support2.lo, support2.hi)),
      sampler_(std::move(sampler)),
      options_(std::move(options)) {
  if (!pdf_) throw ModelError("generic model requires a joint pdf");
  if (!(options_.scale > 0.0)) throw ModelError("generic model scale hint must be positive");
  if (orientation_ == Orientation::scale && (support1_.lo < 0.0 || support2_.lo < 0.0)) {
    throw ModelError("scale model supports must lie in the positive half-line");
  }
  const auto breaks = marginal_breakpoints(Component::first);
  numerics::QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-9;
  opts.breakpoints = breaks;
  total_mass_ =
      numerics::integrate([this](double s) { return compute_marginal(Component::first, s); },
                          support1_, opts)
          .value;
  if (!(std::abs(total_mass_ - 1.0) <= options_.normalization_tol)) {
    std::ostringstream os;
    os << "joint pdf integrates to " << total_mass_ << ", expected 1";
    throw ModelError(os.str());
  }
}

double GenericModel::joint_pdf(double z1, double z2) const {
  if (!within(support1_, z1) || !within(support2_, z2)) return 0.0;
  return pdf_(z1, z2);
}

numerics::Interval GenericModel::support(Component i) const {
  return i == Component::first ? support1_ : support2_;
}

std::vector<double> GenericModel::marginal_breakpoints(Component i) const {
  std::vector<double> out;
  const auto sup = support(i);
  auto push = [&](double x) {
    if (within(sup, x)) out.push_back(x);
  };
  if (orientation_ == Orientation::location) {
    for (double h : kLocationHints) push(h * options_.scale);
  } else {
    for (double h : kScaleHints) push(h * options_.scale);
  }
  return out;
}

double GenericModel::inside(Component i, double s) const {
  return within(support(i), s) ? 1.0 : 0.0;
}

double GenericModel::compute_marginal(Component i, double s) const {
  if (inside(i, s) == 0.0) return 0.0;
  const Component other = i == Component::first ? Component::second : Component::first;
  std::vector<double> breaks = marginal_breakpoints(other);
  for (double tb : options_.kernel_breakpoints) {
    if (orientation_ == Orientation::location) {
      breaks.push_back(i == Component::first ? s + tb : s - tb);
    } else if (tb > 0.0) {
      breaks.push_back(i == Component::first ? s * tb : s / tb);
    }
  }
  auto integrand = [&](double z) {
    return i == Component::first ? joint_pdf(s, z) : joint_pdf(z, s);
  };
  return numerics::integrate(integrand, support(other), tight_options(breaks)).value;
}

double GenericModel::marginal_pdf(Component i, double s) const {
  if (!options_.cache_marginals) return compute_marginal(i, s);
  const auto key = std::make_pair(index_of(i), s);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  const double v = compute_marginal(i, s);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.emplace(key, v);
  return v;
}

double GenericModel::cond_pdf(Component i, double t, double s) const {
  const double fi = marginal_pdf(i, s);
  if (!(fi > 0.0)) return 0.0;
  if (orientation_ == Orientation::location) {
    return i == Component::first ? joint_pdf(s, t + s) / fi : joint_pdf(s - t, s) / fi;
  }
  if (!(t > 0.0)) return 0.0;
  return i == Component::first ? s * joint_pdf(s, s * t) / fi
                               : (s / (t * t)) * joint_pdf(s / t, s) / fi;
}

double GenericModel::cond_cdf(Component i, double t, double s) const {
  if (inside(i, s) == 0.0) return 0.0;
  if (orientation_ == Orientation::scale && !(t > 0.0)) return 0.0;
  // H_i(t|s) f_i(s) is a partial integral of the joint density along the
  // other coordinate; split it at the image of t and normalize by the sum.
  const Component other = i == Component::first ? Component::second : Component::first;
  const auto sup = support(other);
  double cut;
  if (orientation_ == Orientation::location) {
    cut = i == Component::first ? s + t : s - t;
  } else {
    cut = i == Component::first ? s * t : s / t;
  }
  // For component 1 the event {Z <= t} is the lower piece; for component 2
  // it is the upper piece (Z1 >= cut).
  std::vector<double> breaks = marginal_breakpoints(other);
  for (double tb : options_.kernel_breakpoints) {
    if (orientation_ == Orientation::location) {
      breaks.push_back(i == Component::first ? s + tb : s - tb);
    } else if (tb > 0.0) {
      breaks.push_back(i == Component::first ? s * tb : s / tb);
    }
  }
  auto integrand = [&](double z) {
    return i == Component::first ? joint_pdf(s, z) : joint_pdf(z, s);
  };
  const auto opts = tight_options(breaks);
  double lower = 0.0;
  double upper = 0.0;
  if (cut > sup.lo) {
    lower = numerics::integrate(integrand, {sup.lo, std::min(cut, sup.hi)}, opts).value;
  }
  if (cut < sup.hi) {
    upper = numerics::integrate(integrand, {std::max(cut, sup.lo), sup.hi}, opts).value;
  }
  const double total = lower + upper;
  if (!(total > 0.0)) return 0.0;
  return i == Component::first ? lower / total : upper / total;
}

Pivot GenericModel::sample_pivot(Rng& rng) const {
  if (!sampler_) throw ModelError("generic model has no sampler");
  return sampler_(rng);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const NormalModel> normal_model(const NormalSpec& spec) {
  return std::make_shared<const NormalModel>(spec);
}

std::shared_ptr<const CrGammaModel> cr_gamma_model() {
  return std::make_shared<const CrGammaModel>();
}

std::shared_ptr<const GenericModel> generic_model(JointPdf joint_pdf, Orientation orientation,
                                                  numerics::Interval support1,
                                                  numerics::Interval support2,
                                                  PivotSampler sampler,
                                                  GenericModelOptions options) {
  return std::make_shared<const GenericModel>(std::move(joint_pdf), orientation, support1,
                                              support2, std::move(sampler), std::move(options));
}

double conditional_cdf(const BivariateModel& model, Component i, double t, double s) {
  if (!(model.marginal_pdf(i, s) > 0.0)) {
    std::ostringstream os;
    os << "cannot condition on Z" << index_of(i) << " = " << s << ": marginal density is zero";
    throw ConditioningError(os.str());
  }
  return model.cond_cdf(i, t, s);
}

}  // namespace restrict_est
