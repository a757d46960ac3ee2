#include "graphletqa/graphlet/esu.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "graphletqa/errors.hpp"
#include "graphletqa/util/random.hpp"

namespace graphletqa::graphlet {

using kg::NodeIndex;

namespace {

void check_k(int k) {
  if (k < kMinShapeSize || k > kMaxShapeSize) {
    throw ConfigError("subgraph size k=" + std::to_string(k) + " outside 3..5");
  }
}

void check_simple(const kg::Graph& graph) {
  if (!graph.simple()) throw ConfigError("ESU requires an undirected simple graph");
}

// One ESU subtree. The optional Rng turns it into RAND-ESU.
class Extender {
 public:
  Extender(const kg::Graph& graph, int k, NodeIndex root, std::span<const double> probs,
           util::Rng* rng, const SubgraphVisitor& visit)
      : graph_(graph), k_(k), root_(root), probs_(probs), rng_(rng), visit_(visit) {}

  void run() {
    if (!explore(1)) return;
    sub_.push_back(root_);
    std::vector<NodeIndex> ext;
    for (NodeIndex u : graph_.neighbors(root_)) {
      if (u > root_) ext.push_back(u);
    }
    extend(ext);
  }

 private:
  bool explore(int depth) {
    if (!rng_) return true;
    return rng_->bernoulli(probs_[static_cast<std::size_t>(depth) - 1]);
  }

  // u is in the closed neighbourhood of the current sub-graph.
  bool touches_sub(NodeIndex u) const {
    for (NodeIndex x : sub_) {
      if (x == u || graph_.adjacent(x, u)) return true;
    }
    return false;
  }

  void extend(const std::vector<NodeIndex>& ext) {
    if (static_cast<int>(sub_.size()) == k_) {
      visit_(sub_);
      return;
    }
    for (std::size_t i = 0; i < ext.size(); ++i) {
      const NodeIndex w = ext[i];
      std::vector<NodeIndex> next(ext.begin() + static_cast<std::ptrdiff_t>(i) + 1, ext.end());
      if (static_cast<int>(sub_.size()) + 1 < k_) {
        for (NodeIndex u : graph_.neighbors(w)) {
          if (u > root_ && !touches_sub(u)) next.push_back(u);
        }
      }
      const int depth = static_cast<int>(sub_.size()) + 1;
      if (!explore(depth)) continue;
      sub_.push_back(w);
      extend(next);
      sub_.pop_back();
    }
  }

  const kg::Graph& graph_;
  int k_;
  NodeIndex root_;
  std::span<const double> probs_;
  util::Rng* rng_;
  const SubgraphVisitor& visit_;
  std::vector<NodeIndex> sub_;
};

void check_probabilities(int k, std::span<const double> probabilities) {
  if (static_cast<int>(probabilities.size()) != k) {
    throw ConfigError("RAND-ESU needs exactly k=" + std::to_string(k) + " depth probabilities");
  }
  for (double p : probabilities) {
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("depth probabilities must lie in (0, 1]");
  }
}

}  // namespace

SmallGraph induced_small_graph(const kg::Graph& graph, std::span<const NodeIndex> vertices) {
  const int n = static_cast<int>(vertices.size());
  std::uint32_t code = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (graph.adjacent(vertices[i], vertices[j])) code |= 1u << SmallGraph::pair_bit(i, j, n);
    }
  }
  return SmallGraph(n, code);
}

Subgraph make_subgraph(const kg::Graph& graph, std::span<const NodeIndex> vertices) {
  Subgraph s;
  s.vertex_ids.assign(vertices.begin(), vertices.end());
  s.induced_edges = induced_small_graph(graph, vertices).edges();
  return s;
}

void enumerate_esu_root(const kg::Graph& graph, int k, NodeIndex root, const SubgraphVisitor& visit) {
  Extender(graph, k, root, {}, nullptr, visit).run();
}

void enumerate_esu(const kg::Graph& graph, int k, const SubgraphVisitor& visit) {
  check_k(k);
  check_simple(graph);
  for (NodeIndex v = 0; v < graph.node_count(); ++v) enumerate_esu_root(graph, k, v, visit);
}

void sample_rand_esu_root(const kg::Graph& graph, int k, std::span<const double> probabilities,
                          std::uint64_t seed, NodeIndex root, const SubgraphVisitor& visit) {
  util::Rng rng(util::derive_seed(seed, root));
  Extender(graph, k, root, probabilities, &rng, visit).run();
}

void sample_rand_esu(const kg::Graph& graph, int k, std::span<const double> probabilities,
                     std::uint64_t seed, const SubgraphVisitor& visit) {
  check_k(k);
  check_simple(graph);
  check_probabilities(k, probabilities);
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    sample_rand_esu_root(graph, k, probabilities, seed, v, visit);
  }
}

std::vector<Subgraph> collect_esu(const kg::Graph& graph, int k) {
  std::vector<Subgraph> out;
  enumerate_esu(graph, k, [&](std::span<const NodeIndex> vs) { out.push_back(make_subgraph(graph, vs)); });
  return out;
}

void for_each_root_parallel(std::size_t roots, unsigned threads,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn,
                            std::size_t block_size) {
  if (block_size == 0) block_size = 1;
  const std::size_t blocks = (roots + block_size - 1) / block_size;
  auto run_block = [&](std::size_t b) {
    fn(b, b * block_size, std::min(roots, (b + 1) * block_size));
  };
  if (threads <= 1 || blocks <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::jthread> workers;
  const auto n = std::min<std::size_t>(threads, blocks);
  for (std::size_t t = 0; t < n; ++t) {
    workers.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          run_block(b);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = blocks;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

std::map<ShapeId, std::uint64_t> count_shapes(const kg::Graph& graph, int k, unsigned threads) {
  check_k(k);
  check_simple(graph);
  const std::size_t codes = std::size_t{1} << SmallGraph::pair_count(k);
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (graph.node_count() + kBlock - 1) / kBlock;
  std::vector<std::vector<std::uint64_t>> per_block(blocks);
  for_each_root_parallel(
      graph.node_count(), threads,
      [&](std::size_t block, std::size_t begin, std::size_t end) {
        std::vector<std::uint64_t> raw(codes, 0);
        for (std::size_t v = begin; v < end; ++v) {
          enumerate_esu_root(graph, k, static_cast<NodeIndex>(v), [&](std::span<const NodeIndex> vs) {
            ++raw[induced_small_graph(graph, vs).code()];
          });
        }
        per_block[block] = std::move(raw);
      },
      kBlock);
  std::vector<std::uint64_t> raw(codes, 0);
  for (const auto& block : per_block) {
    for (std::size_t c = 0; c < block.size(); ++c) raw[c] += block[c];
  }
  std::map<ShapeId, std::uint64_t> counts;
  for (std::size_t c = 0; c < codes; ++c) {
    if (raw[c] == 0) continue;
    counts[canonical_form(SmallGraph(k, static_cast<std::uint32_t>(c)))] += raw[c];
  }
  return counts;
}

}  // namespace graphletqa::graphlet
