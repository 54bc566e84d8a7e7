#include <benchmark/benchmark.h>

#include "rh/rules.hpp"
#include "rh/synthetic.hpp"

using namespace rh;

namespace {

// Ego cruising in the middle lane for the whole scenario.
WorldView cruising_world(const Scenario& sc) {
  EgoTrack ego;
  for (int i = 0; i < sc.steps; ++i) {
    RoadState r;
    r.id = kEgoId;
    r.s = 20.0 + 22.0 * i * sc.timestep;
    r.d = 3.5;
    r.vs = 22.0;
    ego.states.push_back(r);
  }
  return WorldView(sc, ego);
}

void BM_RuleSeries(benchmark::State& state) {
  SyntheticSpec spec;
  spec.vehicles = static_cast<int>(state.range(0));
  spec.duration = 15.0;
  Scenario sc = insert_no_overtaking_sign(generate_synthetic_scenario(spec, 4), 4);
  const WorldView world = cruising_world(sc);
  const RuleId rule = static_cast<RuleId>(state.range(1));
  const RuleParams params;
  for (auto _ : state) benchmark::DoNotOptimize(rule_series(rule, world, params));
  state.SetItemsProcessed(static_cast<long>(state.iterations()) * static_cast<long>(world.size()));
}
BENCHMARK(BM_RuleSeries)
    ->ArgsProduct({{4, 16}, {0, 1, 2}})
    ->ArgNames({"vehicles", "rule"})
    ->Unit(benchmark::kMillisecond);

void BM_RuleBook(benchmark::State& state) {
  SyntheticSpec spec;
  spec.vehicles = 8;
  spec.duration = 15.0;
  Scenario sc = insert_no_overtaking_sign(generate_synthetic_scenario(spec, 4), 4);
  const WorldView world = cruising_world(sc);
  for (auto _ : state) benchmark::DoNotOptimize(rulebook_evaluate(world, RuleParams{}));
}
BENCHMARK(BM_RuleBook)->Unit(benchmark::kMillisecond);

}  // namespace
