#include <benchmark/benchmark.h>

#include "textnav/envsim.hpp"
#include "textnav/router.hpp"

namespace {

using namespace textnav;

void BuildFromRoutes(benchmark::State& state) {
  const GeoEnvironment env =
      generate_environment(3, static_cast<int>(state.range(0)));
  const PathDataset dataset = sample_dataset(env, 3);
  for (auto _ : state) {
    TopoMap map;
    for (const auto& item : dataset.items) {
      benchmark::DoNotOptimize(map.add_path(item.truth));
    }
  }
}
BENCHMARK(BuildFromRoutes)->Arg(12)->Arg(48);

void InferAcrossNode(benchmark::State& state) {
  TopoMap map;
  map.add_path([] {
    CanonicalPath p;
    for (const char* w : {"n1", "n2", "n3"}) {
      p.waypoints.emplace_back(w);
    }
    p.actions = {Action::TurnRight};
    return p;
  }());
  map.add_path([] {
    CanonicalPath p;
    for (const char* w : {"n1", "n2", "n4", "n5"}) {
      p.waypoints.emplace_back(w);
    }
    p.actions = {Action::Forward, Action::TurnLeft};
    return p;
  }());
  for (auto _ : state) {
    benchmark::DoNotOptimize(map.infer_action("n4", "n2", "n3"));
  }
}
BENCHMARK(InferAcrossNode);

void RouteDesignatedPairs(benchmark::State& state) {
  const GeoEnvironment env =
      generate_environment(4, static_cast<int>(state.range(0)));
  const TopoMap map = full_map(env);
  const auto designated = env.designated();
  for (auto _ : state) {
    for (const NodeName& start : designated) {
      for (const NodeName& goal : designated) {
        if (start == goal) {
          continue;
        }
        benchmark::DoNotOptimize(find_route(map, RouteQuery{start, goal}));
      }
    }
  }
}
BENCHMARK(RouteDesignatedPairs)->Arg(12)->Arg(48)->Unit(benchmark::kMicrosecond);

}  // namespace
