#include <benchmark/benchmark.h>

#include <random>

#include "graphletqa/qa.hpp"

using namespace graphletqa;

namespace {

std::vector<qa::QARecord> records(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> len(200.0, 40.0);
  std::vector<qa::QARecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].graphlet_id = "g" + std::to_string(i);
    out[i].question.assign(static_cast<std::size_t>(std::max(1.0, len(rng))), 'q');
    out[i].answer.assign(static_cast<std::size_t>(std::max(1.0, len(rng) / 2)), 'a');
  }
  return out;
}

void BM_LengthBounds(benchmark::State& state) {
  const auto rs = records(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qa::compute_length_bounds(rs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LengthBounds)->Arg(1000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_LengthFilter(benchmark::State& state) {
  const auto rs = records(static_cast<std::size_t>(state.range(0)));
  const auto bounds = qa::compute_length_bounds(rs);
  for (auto _ : state) benchmark::DoNotOptimize(qa::length_filter(rs, bounds));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LengthFilter)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace
