#include <benchmark/benchmark.h>

#include <numbers>

#include "textnav/action.hpp"

namespace {

using namespace textnav;

void ComposeFullTable(benchmark::State& state) {
  constexpr Action kAll[] = {Action::Forward, Action::TurnLeft,
                             Action::TurnAround, Action::TurnRight};
  for (auto _ : state) {
    for (Action a : kAll) {
      for (Action b : kAll) {
        benchmark::DoNotOptimize(compose(a, b));
      }
    }
  }
}
BENCHMARK(ComposeFullTable);

void QuantizeSweep(benchmark::State& state) {
  const AngleThreshold theta;
  const double pi = std::numbers::pi;
  for (auto _ : state) {
    for (int i = -499; i <= 500; ++i) {
      benchmark::DoNotOptimize(from_angle(pi * i / 500.0, theta));
    }
  }
}
BENCHMARK(QuantizeSweep);

}  // namespace

BENCHMARK_MAIN();
