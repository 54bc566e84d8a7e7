#include <memory>

#include <benchmark/benchmark.h>

#include "rh/planner.hpp"
#include "rh/synthetic.hpp"

using namespace rh;

namespace {

void BM_PlanCycle(benchmark::State& state) {
  SyntheticSpec spec;
  spec.vehicles = static_cast<int>(state.range(0));
  spec.duration = 20.0;
  const Scenario sc = generate_synthetic_scenario(spec, 3);
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  PlanContext ctx{std::make_shared<Traffic>(sc, frame, 0, sc.steps - 1), frame};
  ctx.timestep = sc.timestep;
  CostWeights weights;
  weights.value = 0.0;
  const PlannerParams params;
  const FrenetState start{100.0, 20.0, 0.0, 0.0, 0.0, 0.0};
  for (auto _ : state) {
    try {
      benchmark::DoNotOptimize(plan(start, ctx, weights, params));
    } catch (const std::exception&) {
    }
  }
}
BENCHMARK(BM_PlanCycle)->Arg(0)->Arg(8)->Arg(24)->Unit(benchmark::kMicrosecond);

void BM_QuinticSampling(benchmark::State& state) {
  const Scenario sc = generate_synthetic_scenario(SyntheticSpec{}, 1);
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  const auto d_targets = lateral_targets(frame, 4);
  const std::vector<double> v_targets = {16.0, 18.0, 20.0, 22.0, 24.0};
  const FrenetState start{100.0, 20.0, 0.0, 0.0, 0.0, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_candidates(start, d_targets, v_targets, PlannerParams{}, frame));
  }
}
BENCHMARK(BM_QuinticSampling)->Unit(benchmark::kMicrosecond);

}  // namespace
