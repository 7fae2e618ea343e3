#include <benchmark/benchmark.h>

#include "restrict_est/risksim.hpp"

using namespace restrict_est;

namespace {

SimPlan plan_for(bool gamma) {
  SimPlan p;
  if (gamma) p.model = cr_gamma_model();
  else p.model = normal_model(NormalSpec(0.2, 0.2, -0.9));
  p.loss = squared_error(p.model->orientation());
  p.component = Component::first;
  p.estimators = {make_best_equivariant(p.model, p.component, p.loss),
                  make_brewster_zidek(p.model, p.component, p.loss),
                  make_stein_clamped(p.model, p.component, p.loss)};
  p.lambda_grid = default_lambda_grid(*p.model, 21);
  p.replications = 10000;
  p.base_theta1 = gamma ? 1.0 : 0.0;
  return p;
}

void BM_serial(benchmark::State& st) {
  const SimPlan p = plan_for(st.range(0) != 0);
  for (auto _ : st) benchmark::DoNotOptimize(simulate_serial(p));
}

void BM_parallel(benchmark::State& st) {
  const SimPlan p = plan_for(st.range(0) != 0);
  for (auto _ : st) benchmark::DoNotOptimize(simulate(p, static_cast<int>(st.range(1))));
}

}  // namespace

// arg 0: 0 normal, 1 cr-gamma
BENCHMARK(BM_serial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_parallel)->Args({0, 2})->Args({0, 4})->Args({1, 2})->Args({1, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
