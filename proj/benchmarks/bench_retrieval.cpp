#include <benchmark/benchmark.h>

#include <random>

#include "graphletqa/evidence.hpp"

using namespace graphletqa;

namespace {

std::vector<evidence::Bm25Index::Entry> synthetic_corpus(std::size_t docs, std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<evidence::Bm25Index::Entry> out;
  for (std::size_t d = 0; d < docs; ++d) {
    std::string text;
    const std::size_t len = 80 + rng() % 160;
    for (std::size_t t = 0; t < len; ++t) text += "w" + std::to_string(rng() % vocab) + " ";
    out.push_back({"d" + std::to_string(d), std::move(text)});
  }
  return out;
}

void BM_BuildIndex(benchmark::State& state) {
  const auto corpus = synthetic_corpus(static_cast<std::size_t>(state.range(0)), 20000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(evidence::Bm25Index::build(corpus));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildIndex)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_TopK(benchmark::State& state) {
  const auto index = evidence::Bm25Index::build(synthetic_corpus(static_cast<std::size_t>(state.range(0)), 20000, 2));
  std::mt19937_64 rng(3);
  std::vector<std::vector<std::string>> queries;
  for (int q = 0; q < 64; ++q) {
    std::vector<std::string> terms;
    for (int t = 0; t < 12; ++t) terms.push_back("w" + std::to_string(rng() % 20000));
    queries.push_back(terms);
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.top_k(queries[i++ % queries.size()], 10));
}
BENCHMARK(BM_TopK)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void BM_Analyze(benchmark::State& state) {
  const std::string text =
      "Imatinib inhibits BCR-ABL tyrosine kinase activity in chronic myeloid leukemia; β-catenin "
      "signalling and TP53 status modulate the response in vitro and in vivo.";
  for (auto _ : state) benchmark::DoNotOptimize(evidence::analyze(text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Analyze);

}  // namespace
