#include "restrict_est/special.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>

namespace restrict_est::special {

namespace {
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kMillsSwitch = -37.0;
}  // namespace

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double log_normal_cdf(double z) {
  if (z < kMillsSwitch) {
    // log Phi(z) = log phi(z) - log(-z) + log(1 - 1/z^2 + 3/z^4 - 15/z^6 + ...)
    const double r = 1.0 / (z * z);
    const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
    return -0.5 * z * z + std::log(kInvSqrt2Pi) - std::log(-z) + std::log(series);
  }
  if (z < 0.0) return std::log(normal_cdf(z));
  return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
}

double inverse_mills(double z) {
  if (z < kMillsSwitch) {
    const double r = 1.0 / (z * z);
    const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - 105.0 * r)));
    return -z / series;
  }
  return normal_pdf(z) / normal_cdf(z);
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

double exp_defect(double x) {
  if (std::abs(x) < 1e-2) {
    // x^2/2 - x^3/6 + x^4/24 - x^5/120 + x^6/720
    return x * x * (0.5 - x * (1.0 / 6 - x * (1.0 / 24 - x * (1.0 / 120 - x / 720.0))));
  }
  return x + std::expm1(-x);
}

}  // namespace restrict_est::special
