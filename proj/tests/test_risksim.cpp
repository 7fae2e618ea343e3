#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "restrict_est/risksim.hpp"

using namespace restrict_est;
using C = Component;

namespace {

SimPlan make_plan(ModelPtr m, C i, std::size_t reps = 4000) {
  SimPlan p;
  p.model = m;
  p.component = i;
  p.loss = squared_error(m->orientation());
  p.estimators = {make_best_equivariant(m, i, p.loss), make_brewster_zidek(m, i, p.loss),
                  make_stein_clamped(m, i, p.loss)};
  p.lambda_grid = default_lambda_grid(*m, 9);
  p.replications = reps;
  p.base_theta1 = m->orientation() == Orientation::location ? 0.0 : 1.0;
  return p;
}

bool same(const RiskCurve& a, const RiskCurve& b) {
  return a.lambdas == b.lambdas && a.labels == b.labels && a.mean == b.mean &&
         a.std_err == b.std_err && a.diff_mean == b.diff_mean && a.diff_se == b.diff_se;
}

}  // namespace

TEST_CASE("lambda grids") {
  const auto n = normal_model(NormalSpec(0.5, 1.0, 0.0));
  const auto g = default_lambda_grid(*n, 21);
  CHECK(g.size() == 21);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(5.0 * n->d_scale()));
  const auto s = default_lambda_grid(*cr_gamma_model(), 21);
  CHECK(s.front() == doctest::Approx(1.0));
  CHECK(s.back() == doctest::Approx(20.0));
}

TEST_CASE("plan validation") {
  auto p = make_plan(normal_model(NormalSpec(1, 1, 0)), C::first);
  p.lambda_grid = {-1.0};
  CHECK_THROWS_AS(simulate(p), PlanError);
  auto q = make_plan(cr_gamma_model(), C::first);
  q.lambda_grid = {0.5};
  CHECK_THROWS_AS(simulate(q), PlanError);
  auto r = make_plan(cr_gamma_model(), C::first);
  r.estimators.push_back(r.estimators.front());
  CHECK_THROWS_AS(simulate(r), PlanError);
  auto s = make_plan(cr_gamma_model(), C::first);
  s.replications = 10;
  CHECK_THROWS_AS(simulate(s), PlanError);
}

TEST_CASE("BLEE and BSEE risks") {
  const auto n = normal_model(NormalSpec(0.5, 1.0, 0.0));
  const auto c = simulate(make_plan(n, C::first, 10000));
  const auto g = simulate(make_plan(cr_gamma_model(), C::first, 10000));
  for (std::size_t j = 0; j < c.lambdas.size(); ++j) {
    CHECK(std::abs(c.mean[j][0] - 0.25) <= 4.0 * c.std_err[j][0]);
    CHECK(std::abs(g.mean[j][0] - 1.0 / 3) <= 4.0 * g.std_err[j][0]);
  }
}

TEST_CASE("B-Z approaches the BLEE at large lambda") {
  const auto n = normal_model(NormalSpec(0.5, 1.0, 0.0));
  auto p = make_plan(n, C::first, 10000);
  p.lambda_grid = {10.0 * n->d_scale()};
  const auto c = simulate(p);
  CHECK(std::abs(c.mean[0][1] - c.mean[0][0]) <= 4.0 * std::max(c.std_err[0][0], c.std_err[0][1]));
}

TEST_CASE("no dominance flags for (0.5, 1, 0) and baseline self-comparison") {
  const auto n = normal_model(NormalSpec(0.5, 1.0, 0.0));
  const auto c = simulate(make_plan(n, C::first, 10000));
  const auto rep = dominance_report(c, "blee");
  CHECK(rep.flags == 0);
  for (const auto& e : rep.entries) {
    if (e.estimator == "blee") {
      CHECK(e.diff_mean == 0.0);
      CHECK(e.diff_se == 0.0);
    }
  }
  const std::size_t bz = c.index_of("bz"), st = c.index_of("stein");
  CHECK(c.diff_mean[1][st][bz] < 0.0);
  CHECK(c.diff_mean.back()[st][bz] > 0.0);
  CHECK_THROWS_AS(dominance_report(c, "nope"), ConfigError);
}

TEST_CASE("paired standard errors are no larger than unpaired") {
  const auto c = simulate(make_plan(normal_model(NormalSpec(0.2, 0.2, -0.9)), C::first));
  for (std::size_t j = 0; j < c.lambdas.size(); ++j) {
    for (std::size_t e = 1; e < c.labels.size(); ++e) {
      const double unpaired = std::hypot(c.std_err[j][e], c.std_err[j][0]);
      CHECK(c.diff_se[j][e][0] <= unpaired);
    }
  }
}

TEST_CASE("determinism and serial reference") {
  const auto p = make_plan(cr_gamma_model(), C::second, 2000);
  const auto a = simulate(p, 1);
  const auto b = simulate(p, 4);
  const auto s = simulate_serial(p);
  CHECK(same(a, b));
  CHECK(same(a, s));
  CHECK(same(a, simulate(p, 3)));
  auto q = p;
  q.seed += 1;
  CHECK_FALSE(same(a, simulate(q)));
  CHECK(stream_seed(7, 3) == stream_seed(7, 3));
  CHECK(stream_seed(7, 3) != stream_seed(7, 4));
}

TEST_CASE("risk is invariant to the base parameter") {
  auto g = make_plan(cr_gamma_model(), C::first, 1000);
  const auto a = simulate(g);
  g.base_theta1 = 4.0;
  const auto b = simulate(g);
  CHECK(a.mean == b.mean);
  CHECK(a.diff_mean == b.diff_mean);

  auto n = make_plan(normal_model(NormalSpec(1.0, 2.0, 0.3)), C::second, 1000);
  const auto c = simulate(n);
  n.base_theta1 = 3.75;
  const auto d = simulate(n);
  for (std::size_t j = 0; j < c.lambdas.size(); ++j) {
    for (std::size_t e = 0; e < c.labels.size(); ++e) {
      CHECK(std::abs(c.mean[j][e] - d.mean[j][e]) <= 1e-12 * std::max(1.0, c.mean[j][e]));
    }
  }
}
