#pragma once

namespace restrict_est::special {

double normal_pdf(double z);
double normal_cdf(double z);
/// log Phi(z), accurate in both tails.
double log_normal_cdf(double z);
/// phi(z) / Phi(z). Switches to the asymptotic expansion below z = -37,
/// where Phi underflows.
double inverse_mills(double z);
double normal_quantile(double p);

/// x - (1 - e^{-x}), accurate for small x.
double exp_defect(double x);

}  // namespace restrict_est::special
