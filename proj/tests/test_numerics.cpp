#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "restrict_est/numerics.hpp"
#include "restrict_est/special.hpp"

using namespace restrict_est;
using namespace restrict_est::special;
using namespace restrict_est::numerics;

TEST_CASE("standard normal density integrates to one") {
  const auto r = integrate([](double z) { return normal_pdf(z); }, whole_line());
  CHECK(std::abs(r.value - 1.0) <= 1e-10);
}

TEST_CASE("gamma(2) density integrates to one") {
  const auto r = integrate([](double x) { return x * std::exp(-x); }, positive_half_line());
  CHECK(std::abs(r.value - 1.0) <= 1e-9);
}

TEST_CASE("third raw moment of Exp(1) is 6") {
  const auto r = integrate([](double x) { return x * x * x * std::exp(-x); }, positive_half_line());
  CHECK(std::abs(r.value - 6.0) <= 6e-8);
}

TEST_CASE("finite interval and breakpoints") {
  const std::vector<double> bp{1.0};
  QuadratureOptions o;
  o.breakpoints = bp;
  const auto r = integrate([](double x) { return std::abs(x - 1.0); }, make_interval(0.0, 3.0), o);
  CHECK(std::abs(r.value - 2.5) <= 1e-10);
}

TEST_CASE("non-finite integrand is a domain error") {
  CHECK_THROWS_AS(integrate([](double) { return std::numeric_limits<double>::quiet_NaN(); },
                            make_interval(0.0, 1.0)),
                  DomainError);
}

TEST_CASE("evaluation budget is enforced and keeps the best estimate") {
  QuadratureOptions o;
  o.max_evaluations = 50;
  o.abs_tol = 1e-15;
  o.rel_tol = 1e-15;
  try {
    integrate([](double x) { return std::sin(1.0 / (x + 1e-3)); }, make_interval(0.0, 1.0), o);
    FAIL("expected BudgetExceededError");
  } catch (const BudgetExceededError& e) {
    CHECK(std::isfinite(e.best_estimate().value));
    CHECK(e.best_estimate().evaluations > 0);
  }
}

TEST_CASE("integration is linear") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 20; ++rep) {
    const double a0 = u(rng), a1 = u(rng), a2 = u(rng), b0 = u(rng), b1 = u(rng), m = u(rng);
    const double a = u(rng), b = u(rng);
    auto f = [=](double x) { return (a0 + a1 * x + a2 * x * x) * normal_pdf(x - m); };
    auto g = [=](double x) { return (b0 + b1 * x * x * x) * normal_pdf(x + m); };
    const double If = integrate(f, whole_line()).value;
    const double Ig = integrate(g, whole_line()).value;
    const double Ih = integrate([&](double x) { return a * f(x) + b * g(x); }, whole_line()).value;
    const double scale = std::abs(a * If) + std::abs(b * Ig) + 1.0;
    CHECK(std::abs(Ih - a * If - b * Ig) <= 3.0 * (kDefaultAbsTol + kDefaultRelTol * scale));
  }
}

TEST_CASE("splitting the domain agrees with the whole") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  auto f = [](double x) { return (1.0 + x * x) * normal_pdf(x - 0.3); };
  const double whole = integrate(f, whole_line()).value;
  for (int rep = 0; rep < 10; ++rep) {
    const double c = u(rng);
    const double parts = integrate(f, make_interval(-INFINITY, c)).value +
                         integrate(f, make_interval(c, INFINITY)).value;
    CHECK(std::abs(parts - whole) <= 2.0 * (kDefaultAbsTol + kDefaultRelTol * std::abs(whole)) * 2.0);
  }
}

TEST_CASE("monotone root examples") {
  CHECK(find_root_monotone([](double c) { return 2.0 - c; }, Monotone::non_increasing, 0.0) ==
        doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(find_root_monotone([](double c) { return -c * c * c; }, Monotone::non_increasing,
                                    5.0)) <= 1e-3);
  auto g = [](double c) {
    return integrate([c](double z) { return 2.0 * (z - c) * normal_pdf(z); }, whole_line()).value;
  };
  CHECK(std::abs(find_root_monotone(g, Monotone::non_increasing, 1.0)) <= 1e-8);
  CHECK(find_root_monotone([](double c) { return c - 7.5; }, Monotone::non_decreasing, -100.0) ==
        doctest::Approx(7.5).epsilon(1e-10));
}

TEST_CASE("root satisfies the bisection oracle") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  const double tol = 1e-8;
  for (int rep = 0; rep < 50; ++rep) {
    const double r0 = u(rng), k = std::abs(u(rng)) + 0.1;
    auto g = [=](double c) { return std::tanh(k * (r0 - c)); };
    const double c = find_root_monotone(g, Monotone::non_increasing, u(rng), tol);
    const bool bracketed = g(c - 10 * tol) >= 0.0 && g(c + 10 * tol) <= 0.0;
    CHECK((bracketed || std::abs(g(c)) <= tol));
  }
}

TEST_CASE("no sign change reports the searched range") {
  try {
    find_root_monotone([](double c) { return 1.0 + std::exp(-c); }, Monotone::non_increasing, 0.0,
                       1e-8, 30);
    FAIL("expected NoRootError");
  } catch (const NoRootError& e) {
    CHECK(e.searched_lo() < e.searched_hi());
  }
}

TEST_CASE("special functions") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(log_normal_cdf(-40.0) == doctest::Approx(-800.0 - std::log(40.0 * std::sqrt(2.0 * std::numbers::pi))).epsilon(1e-6));
  CHECK(inverse_mills(0.0) == doctest::Approx(normal_pdf(0.0) / 0.5));
  CHECK(inverse_mills(-30.0) == doctest::Approx(30.0).epsilon(1e-2));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
}
