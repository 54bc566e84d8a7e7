#include <vector>

#include <benchmark/benchmark.h>

#include "rh/graph.hpp"
#include "rh/synthetic.hpp"
#include "rh/value_net.hpp"

using namespace rh;

namespace {

TrafficGraph busy_graph() {
  SyntheticSpec spec;
  spec.vehicles = 16;
  spec.duration = 5.0;
  const Scenario sc = generate_synthetic_scenario(spec, 9);
  const FrenetFrame frame = sc.lanes.frame(sc.ego.direction);
  RoadState ego;
  ego.id = kEgoId;
  ego.s = 200.0;
  ego.d = 3.5;
  ego.vs = 22.0;
  return build_graph(sc, ego, 0);
}

void BM_ValueForward(benchmark::State& state) {
  const TrafficGraph g = busy_graph();
  ValueNet net;
  net.initialize(1);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(g));
  state.counters["nodes"] = static_cast<double>(g.nodes.size());
}
BENCHMARK(BM_ValueForward)->Unit(benchmark::kMicrosecond);

void BM_ValueBackward(benchmark::State& state) {
  const TrafficGraph g = busy_graph();
  ValueNet net;
  net.initialize(1);
  std::vector<double> grad(net.size(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(net.backward(g, 1.0, grad));
  state.counters["params"] = static_cast<double>(net.size());
}
BENCHMARK(BM_ValueBackward)->Unit(benchmark::kMicrosecond);

void BM_BuildGraph(benchmark::State& state) {
  SyntheticSpec spec;
  spec.vehicles = 16;
  spec.duration = 5.0;
  const Scenario sc = generate_synthetic_scenario(spec, 9);
  RoadState ego;
  ego.id = kEgoId;
  ego.s = 200.0;
  ego.vs = 22.0;
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(sc, ego, 0));
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMicrosecond);

}  // namespace
