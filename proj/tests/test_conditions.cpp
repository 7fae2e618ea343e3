#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "restrict_est/conditions.hpp"
#include "restrict_est/special.hpp"

using namespace restrict_est;
using namespace restrict_est::special;
using C = Component;

namespace {

ConditionReport pdf_report(const BivariateModel& m, C i) {
  return check_ratio_monotone(m, i, KernelLevel::pdf, default_grids(m, i));
}

}  // namespace

TEST_CASE("default grids") {
  const auto n = normal_model(NormalSpec(1.0, 2.0, 0.1));
  const auto g = default_grids(*n, C::first);
  CHECK(g.delta == std::vector<double>{0, 0.25, 0.5, 1, 2, 4});
  CHECK(g.t.size() == 41);
  CHECK(g.s.size() == 41);
  CHECK(std::is_sorted(g.s.begin(), g.s.end()));
  const auto gg = default_grids(*cr_gamma_model(), C::second);
  CHECK(gg.delta == std::vector<double>{1, 1.25, 1.5, 2, 4});
  CHECK(gg.t.front() == doctest::Approx(0.02));
  CHECK(gg.t.back() == doctest::Approx(50.0));
  const auto r = refine(g);
  CHECK(r.t.size() == 81);
  CHECK(r.s.size() == 81);
}

TEST_CASE("normal direction follows the sign of mu1") {
  const auto m = normal_model(NormalSpec(2.0, 0.5, -0.5));
  CHECK(m->spec().mu(C::first) == doctest::Approx(-2.25));
  const auto r = pdf_report(*m, C::first);
  CHECK(r.direction == Direction::non_decreasing);
  CHECK(r.violations.empty());
  CHECK(r.violations_non_decreasing == 0);

  const auto flip = normal_model(NormalSpec(1.0, 5.0, 0.9));
  CHECK(flip->spec().mu(C::first) > 0);
  CHECK(pdf_report(*flip, C::first).direction == Direction::non_increasing);
}

TEST_CASE("degenerate normal case") {
  const auto m = normal_model(NormalSpec(0.5, 1.0, 0.5));
  const auto r = pdf_report(*m, C::first);
  CHECK(r.degenerate);
  CHECK(r.direction == Direction::indeterminate);
}

TEST_CASE("direction flips across the rho sweep") {
  for (int c = 1; c <= 2; ++c) {
    const C i = component_from_int(c);
    const double s1 = c == 1 ? 0.5 : 1.0, s2 = c == 1 ? 1.0 : 0.5;
    // mu_i changes sign at rho = 0.5 for both components
    for (double rho : {-0.6, 0.2, 0.45, 0.55, 0.9}) {
      const auto m = normal_model(NormalSpec(s1, s2, rho));
      const Direction want =
          m->spec().mu(i) < 0 ? Direction::non_decreasing : Direction::non_increasing;
      CHECK(pdf_report(*m, i).direction == want);
    }
  }
}

TEST_CASE("CR-gamma directions and lemma implications") {
  const auto g = cr_gamma_model();
  const auto r1 = pdf_report(*g, C::first);
  CHECK(r1.direction == Direction::non_decreasing);
  const auto r2 = pdf_report(*g, C::second);
  CHECK(r2.direction == Direction::non_increasing);
  const auto lemma = check_lemma_implications(r2, *g, C::second, default_grids(*g, C::second));
  CHECK(lemma.consistent);
  CHECK(lemma.cdf_ratio.direction == Direction::non_increasing);
}

TEST_CASE("lemma implications, normal mu1 < 0") {
  const auto m = normal_model(NormalSpec(2.0, 0.5, -0.5));
  const auto grids = default_grids(*m, C::first);
  const auto r = check_ratio_monotone(*m, C::first, KernelLevel::pdf, grids);
  const auto lemma = check_lemma_implications(r, *m, C::first, grids);
  CHECK(lemma.consistent);
  CHECK(lemma.cdf_ratio.direction == Direction::non_decreasing);
  CHECK(lemma.pdf_over_cdf.direction == Direction::non_increasing);
}

TEST_CASE("refinement keeps the declared direction") {
  const auto g = cr_gamma_model();
  const auto n = normal_model(NormalSpec(0.2, 0.2, -0.9));
  for (const BivariateModel* m : {static_cast<const BivariateModel*>(g.get()),
                                  static_cast<const BivariateModel*>(n.get())}) {
    const auto grids = default_grids(*m, C::first);
    const auto a = check_ratio_monotone(*m, C::first, KernelLevel::pdf, grids);
    const auto b = check_ratio_monotone(*m, C::first, KernelLevel::pdf, refine(grids));
    CHECK(a.direction == b.direction);
    CHECK(b.violations.empty());
  }
}

TEST_CASE("product density ratios do not depend on the conditioning value beyond a shift") {
  const auto m = generic_model([](double a, double b) { return normal_pdf(a) * normal_pdf(b); },
                               Orientation::location, numerics::whole_line(), numerics::whole_line(),
                               nullptr);
  ConditionGrids g;
  g.delta = {0.0, 0.5, 1.0};
  g.t = {-1.0, 0.0, 1.0};
  g.s = {-1.0, 0.0, 1.0};
  const auto r = check_ratio_monotone(*m, C::first, KernelLevel::cdf, g);
  // F2(t - D + s) / F2(t + s) is non-decreasing in s by log-concavity of F2
  for (double t : g.t) {
    for (double s : g.s) {
      CHECK(std::abs(m->cond_cdf(C::first, t, s) - normal_cdf(t + s)) <= 1e-8);
    }
  }
  CHECK(r.direction == Direction::non_decreasing);
}

TEST_CASE("theorem hypothesis") {
  const auto m = normal_model(NormalSpec(0.5, 1.0, 0.0));
  const auto grids = default_grids(*m, C::first);
  const LossSpec l = squared_error_location();
  const auto bz = make_brewster_zidek(m, C::first, l);
  const auto rep = check_theorem_hypothesis(*m, C::first, l, bz.psi, Direction::non_decreasing, grids.t);
  CHECK(rep.ok());
  for (double v : rep.sign_values) CHECK(std::abs(v) <= 1e-7);

  const auto blee = check_theorem_hypothesis(*m, C::first, l, [](double) { return 0.0; },
                                             Direction::non_decreasing, grids.t);
  CHECK(blee.ok());

  const double b = m->spec().beta0();
  const auto bad = make_alpha_family(m->spec(), C::first, AlphaVariant::smooth, b - 0.4);
  const auto fail = check_theorem_hypothesis(*m, C::first, l, bad.psi, Direction::non_decreasing, grids.t);
  CHECK_FALSE(fail.sign_ok);
  CHECK_FALSE(fail.failures.empty());

  CHECK_THROWS_AS(check_theorem_hypothesis(*m, C::first, l, bz.psi, Direction::indeterminate, grids.t),
                  ConfigError);
}

TEST_CASE("expected psi direction") {
  CHECK(expected_psi_direction(Orientation::location, Direction::non_decreasing) == Direction::non_increasing);
  CHECK(expected_psi_direction(Orientation::scale, Direction::non_decreasing) == Direction::non_decreasing);
  CHECK(expected_psi_direction(Orientation::scale, Direction::non_increasing) == Direction::non_increasing);
}
