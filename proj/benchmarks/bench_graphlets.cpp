#include <benchmark/benchmark.h>

#include <random>

#include "graphletqa/graphlet/esu.hpp"
#include "graphletqa/graphlet/sampling.hpp"
#include "graphletqa/graphlet/shape.hpp"
#include "graphletqa/kg.hpp"

using namespace graphletqa;

namespace {

kg::Graph random_graph(int n, double avg_degree, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(avg_degree / (n - 1));
  std::vector<kg::NodeRecord> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({"n" + std::to_string(i), "gene", "Node " + std::to_string(i)});
  std::vector<kg::EdgeRecord> edges;
  for (kg::NodeIndex i = 0; i < static_cast<kg::NodeIndex>(n); ++i) {
    for (kg::NodeIndex j = i + 1; j < static_cast<kg::NodeIndex>(n); ++j) {
      if (coin(rng)) edges.push_back({i, j, "e"});
    }
  }
  return kg::Graph::undirected_simple(std::move(nodes), std::move(edges));
}

void BM_EnumerateEsu(benchmark::State& state) {
  const auto g = random_graph(2000, 6.0, 1);
  const int k = static_cast<int>(state.range(0));
  std::size_t n = 0;
  for (auto _ : state) {
    n = 0;
    graphlet::enumerate_esu(g, k, [&](std::span<const kg::NodeIndex>) { ++n; });
  }
  state.counters["subgraphs"] = static_cast<double>(n);
  state.counters["subgraphs/s"] = benchmark::Counter(static_cast<double>(n), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_EnumerateEsu)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_CanonicalForm(benchmark::State& state) {
  std::vector<graphlet::SmallGraph> graphs;
  for (std::uint32_t code = 0; code < 1024; ++code) {
    graphlet::SmallGraph g(5, code);
    if (g.connected()) graphs.push_back(g);
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(graphlet::canonical_form(graphs[i++ % graphs.size()]));
  }
}
BENCHMARK(BM_CanonicalForm);

void BM_CountShapes(benchmark::State& state) {
  const auto g = random_graph(2000, 6.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(graphlet::count_shapes(g, 4));
}
BENCHMARK(BM_CountShapes)->Unit(benchmark::kMillisecond);

void BM_SamplePerShape(benchmark::State& state) {
  const auto g = random_graph(1000, 6.0, 3);
  graphlet::SamplingPlan plan;
  plan.target = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(graphlet::sample_per_shape(g, plan));
}
BENCHMARK(BM_SamplePerShape)->Arg(100)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
