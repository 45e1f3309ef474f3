#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "textnav/envsim.hpp"
#include "textnav/instruction.hpp"

namespace {

using namespace textnav;

std::vector<std::string> sample_texts() {
  const GeoEnvironment env = generate_environment(5, 24);
  const PathDataset dataset = sample_dataset(env, 5);
  std::vector<std::string> texts;
  for (const auto& item : dataset.items) {
    texts.push_back(item.instruction);
  }
  return texts;
}

void ParseInstructions(benchmark::State& state) {
  const auto texts = sample_texts();
  for (auto _ : state) {
    for (const auto& text : texts) {
      benchmark::DoNotOptimize(parse_instruction(text));
    }
  }
}
BENCHMARK(ParseInstructions)->Unit(benchmark::kMicrosecond);

void GenerateInstructions(benchmark::State& state) {
  const GeoEnvironment env = generate_environment(5, 24);
  const PathDataset dataset = sample_dataset(env, 5);
  for (auto _ : state) {
    for (const auto& item : dataset.items) {
      benchmark::DoNotOptimize(generate_instruction(item.truth));
    }
  }
}
BENCHMARK(GenerateInstructions)->Unit(benchmark::kMicrosecond);

void ExtractionPipeline(benchmark::State& state) {
  const auto texts = sample_texts();
  GrammarBackend backend;
  for (auto _ : state) {
    for (const auto& text : texts) {
      benchmark::DoNotOptimize(extract_canonical(text, backend));
    }
  }
}
BENCHMARK(ExtractionPipeline)->Unit(benchmark::kMicrosecond);

}  // namespace
