#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "graphletqa/graphlet/shape.hpp"
#include "graphletqa/kg.hpp"

namespace graphletqa::graphlet {

/// Receives one connected k-vertex set per call, in ESU insertion order.
/// The span is only valid for the duration of the call.
using SubgraphVisitor = std::function<void(std::span<const kg::NodeIndex>)>;

/// Connected induced sub-graph of a host graph.
struct Subgraph {
  std::vector<kg::NodeIndex> vertex_ids;
  /// Index pairs (i < j) into vertex_ids for every host edge among them.
  std::vector<std::pair<int, int>> induced_edges;
};

Subgraph make_subgraph(const kg::Graph& graph, std::span<const kg::NodeIndex> vertices);

/// Raw (non-canonical) bitcode of the sub-graph induced by `vertices`.
SmallGraph induced_small_graph(const kg::Graph& graph, std::span<const kg::NodeIndex> vertices);

/// Exact ESU: every connected induced k-subgraph of an undirected simple
/// graph is reported exactly once. Roots are visited in index order.
/// Throws ConfigError when k is outside 3..5.
void enumerate_esu(const kg::Graph& graph, int k, const SubgraphVisitor& visit);

/// ESU restricted to the subtree rooted at `root`.
void enumerate_esu_root(const kg::Graph& graph, int k, kg::NodeIndex root, const SubgraphVisitor& visit);

/// RAND-ESU. probabilities[d-1] is the chance that a tree node at depth d
/// (d = 1 for the root) is explored, so every k-subgraph is reported with
/// probability equal to the product. Each root draws from its own stream
/// derived from `seed`, so results do not depend on how roots are split
/// across workers.
void sample_rand_esu(const kg::Graph& graph, int k, std::span<const double> probabilities,
                     std::uint64_t seed, const SubgraphVisitor& visit);

void sample_rand_esu_root(const kg::Graph& graph, int k, std::span<const double> probabilities,
                          std::uint64_t seed, kg::NodeIndex root, const SubgraphVisitor& visit);

/// Convenience: materialise the full exact enumeration.
std::vector<Subgraph> collect_esu(const kg::Graph& graph, int k);

/// Exact census of size-k shapes via ESU plus table canonicalisation. Work
/// is split by root across `threads` workers; the result is independent of
/// the thread count.
std::map<ShapeId, std::uint64_t> count_shapes(const kg::Graph& graph, int k, unsigned threads = 1);

/// Runs fn(root) for every root, spreading roots over worker threads in
/// contiguous blocks. fn must be safe to call concurrently.
void for_each_root_parallel(std::size_t roots, unsigned threads,
                            const std::function<void(std::size_t block, std::size_t begin,
                                                     std::size_t end)>& fn,
                            std::size_t block_size = 256);

}  // namespace graphletqa::graphlet
