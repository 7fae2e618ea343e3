#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string_view>
#include <utility>
#include <vector>

#include "restrict_est/common.hpp"
#include "restrict_est/numerics.hpp"

namespace restrict_est {

/// Model construction failed (bad parameters, density not normalized).
class ModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Pivotal draw (Z1, Z2): parameter-free; theta is applied afterwards.
struct Pivot {
  double z1;
  double z2;
};

struct Observation {
  double x1;
  double x2;
};

Observation apply_theta(Orientation o, Pivot z, double theta1, double theta2);

/// Density contract for a bivariate location or scale family.
///
/// Conditional kernels describe Z = Z2 - Z1 (location) or Z = Z2 / Z1 (scale)
/// given Z_i = s:
///   location: h1(t|s) = f(s, t+s)/f1(s),      h2(t|s) = f(s-t, s)/f2(s)
///   scale:    h1(t|s) = s f(s, st)/f1(s),      h2(t|s) = (s/t^2) f(s/t, s)/f2(s)
/// and H_i(t|s) is the matching conditional cdf.
///
/// Implementations are immutable and safe to share across threads.
class BivariateModel {
 public:
  virtual ~BivariateModel() = default;

  virtual std::string_view kind() const = 0;
  virtual Orientation orientation() const = 0;

  virtual double joint_pdf(double z1, double z2) const = 0;
  virtual double marginal_pdf(Component i, double s) const = 0;
  virtual numerics::Interval support(Component i) const = 0;
  virtual double cond_pdf(Component i, double t, double s) const = 0;
  virtual double cond_cdf(Component i, double t, double s) const = 0;

  virtual double log_marginal_pdf(Component i, double s) const;
  virtual double log_cond_pdf(Component i, double t, double s) const;
  virtual double log_cond_cdf(Component i, double t, double s) const;

  /// Points on the t-axis where the kernels change formula.
  virtual std::vector<double> kernel_breakpoints() const { return {}; }
  /// Panel hints on the s-axis where the marginal f_i carries its mass.
  virtual std::vector<double> marginal_breakpoints(Component i) const = 0;
  /// Typical spread of D; used to size default t-grids.
  virtual double d_scale() const = 0;

  virtual double marginal_quantile(Component i, double p) const;

  virtual Pivot sample_pivot(Rng& rng) const = 0;

  Observation sample(double theta1, double theta2, Rng& rng) const {
    return apply_theta(orientation(), sample_pivot(rng), theta1, theta2);
  }

  /// Domain of D: the whole line for location, (0, inf) for scale.
  numerics::Interval d_domain() const;
};

using ModelPtr = std::shared_ptr<const BivariateModel>;

/// Bivariate normal with known sigma1, sigma2, rho.
class NormalSpec {
 public:
  /// Throws ModelError unless sigma_i > 0 and |rho| < 1.
  NormalSpec(double sigma1, double sigma2, double rho);

  double sigma1() const { return sigma1_; }
  double sigma2() const { return sigma2_; }
  double rho() const { return rho_; }
  double sigma(Component i) const { return i == Component::first ? sigma1_ : sigma2_; }

  /// mu1 = rho sigma2 - sigma1, mu2 = sigma2 - rho sigma1.
  double mu(Component i) const;
  /// Conditional sd of Z2 - Z1 given Z_i: sigma_{3-i} sqrt(1 - rho^2).
  double xi(Component i) const;
  double tau() const;
  double tau_squared() const;
  /// (sigma2^2 - rho sigma1 sigma2) / tau^2.
  double beta0() const;
  /// True when mu_i == 0: no improvement over the BLEE is available.
  bool degenerate(Component i) const;

 private:
  double sigma1_;
  double sigma2_;
  double rho_;
};

class NormalModel final : public BivariateModel {
 public:
  explicit NormalModel(NormalSpec spec) : spec_(spec) {}

  const NormalSpec& spec() const { return spec_; }

  std::string_view kind() const override { return "normal"; }
  Orientation orientation() const override { return Orientation::location; }
  double joint_pdf(double z1, double z2) const override;
  double marginal_pdf(Component i, double s) const override;
  double log_marginal_pdf(Component i, double s) const override;
  numerics::Interval support(Component i) const override;
  double cond_pdf(Component i, double t, double s) const override;
  double cond_cdf(Component i, double t, double s) const override;
  double log_cond_pdf(Component i, double t, double s) const override;
  double log_cond_cdf(Component i, double t, double s) const override;
  std::vector<double> marginal_breakpoints(Component i) const override;
  double d_scale() const override { return spec_.tau(); }
  double marginal_quantile(Component i, double p) const override;
  Pivot sample_pivot(Rng& rng) const override;

 private:
  double cond_mean(Component i, double s) const;
  NormalSpec spec_;
};

/// Cheriyan-Ramabhadran bivariate gamma with unit shapes:
/// (Z1, Z2) = (Y0 + Y1, Y0 + Y2) for independent standard exponentials.
class CrGammaModel final : public BivariateModel {
 public:
  std::string_view kind() const override { return "cr-gamma"; }
  Orientation orientation() const override { return Orientation::scale; }
  double joint_pdf(double z1, double z2) const override;
  double marginal_pdf(Component i, double s) const override;
  double log_marginal_pdf(Component i, double s) const override;
  numerics::Interval support(Component i) const override;
  double cond_pdf(Component i, double t, double s) const override;
  double cond_cdf(Component i, double t, double s) const override;
  double log_cond_pdf(Component i, double t, double s) const override;
  double log_cond_cdf(Component i, double t, double s) const override;
  std::vector<double> kernel_breakpoints() const override { return {1.0}; }
  std::vector<double> marginal_breakpoints(Component i) const override;
  double d_scale() const override { return 1.0; }
  double marginal_quantile(Component i, double p) const override;
  Pivot sample_pivot(Rng& rng) const override;
};

using JointPdf = std::function<double(double, double)>;
using PivotSampler = std::function<Pivot(Rng&)>;

struct GenericModelOptions {
  /// t-axis kinks of the joint density (e.g. the diagonal z1 = z2).
  std::vector<double> kernel_breakpoints;
  /// Typical scale of Z_i; sizes the quadrature panels.
  double scale = 1.0;
  /// Memoize marginal densities by exact argument. Off by default.
  bool cache_marginals = false;
  double normalization_tol = 1e-6;
};

/// Model defined only by its joint pdf; marginals and kernels come from
/// quadrature on demand.
class GenericModel final : public BivariateModel {
 public:
  /// Throws ModelError if the joint pdf does not integrate to 1.
  GenericModel(JointPdf joint_pdf, Orientation orientation, numerics::Interval support1,
               numerics::Interval support2, PivotSampler sampler,
               GenericModelOptions options = {});

  std::string_view kind() const override { return "generic"; }
  Orientation orientation() const override { return orientation_; }
  double joint_pdf(double z1, double z2) const override;
  double marginal_pdf(Component i, double s) const override;
  numerics::Interval support(Component i) const override;
  double cond_pdf(Component i, double t, double s) const override;
  double cond_cdf(Component i, double t, double s) const override;
  std::vector<double> kernel_breakpoints() const override { return options_.kernel_breakpoints; }
  std::vector<double> marginal_breakpoints(Component i) const override;
  double d_scale() const override { return options_.scale; }
  Pivot sample_pivot(Rng& rng) const override;

  double total_mass() const { return total_mass_; }

 private:
  double compute_marginal(Component i, double s) const;
  double inside(Component i, double s) const;

  JointPdf pdf_;
  Orientation orientation_;
  numerics::Interval support1_;
  numerics::Interval support2_;
  PivotSampler sampler_;
  GenericModelOptions options_;
  double total_mass_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<int, double>, double> cache_;
};

std::shared_ptr<const NormalModel> normal_model(const NormalSpec& spec);
std::shared_ptr<const CrGammaModel> cr_gamma_model();
std::shared_ptr<const GenericModel> generic_model(JointPdf joint_pdf, Orientation orientation,
                                                  numerics::Interval support1,
                                                  numerics::Interval support2,
                                                  PivotSampler sampler,
                                                  GenericModelOptions options = {});

/// H_i(t|s), throwing ConditioningError when f_i(s) = 0.
double conditional_cdf(const BivariateModel& model, Component i, double t, double s);

}  // namespace restrict_est
