#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace graphletqa::kg {

using NodeIndex = std::uint32_t;

struct NodeRecord {
  std::string id;
  std::string node_type;
  /// Canonical human-readable name; empty when unknown.
  std::string name;

  bool named() const noexcept { return !name.empty(); }
  bool operator==(const NodeRecord&) const = default;
};

struct EdgeRecord {
  NodeIndex source = 0;
  NodeIndex target = 0;
  std::string edge_type;

  bool operator==(const EdgeRecord&) const = default;
};

/// Knowledge graph with typed nodes and typed edges.
///
/// Two flavours exist. A directed multigraph keeps every edge row as loaded
/// (parallel edges and self-loops included); neighbors() are out-neighbours
/// with multiplicity. An undirected simple graph stores each edge once with
/// source < target and symmetric, duplicate-free adjacency.
///
/// Graphs are immutable once built and safe to share across threads.
class Graph;
Graph simplify(const Graph& graph);

class Graph {
 public:
  Graph() = default;

  /// Throws ReferentialError if an edge references an index outside `nodes`
  /// and DuplicateIdError on repeated node ids.
  static Graph directed_multigraph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

  /// Edges must already be simple: no self-loops and no repeated pairs in
  /// either orientation. Violations throw std::invalid_argument.
  static Graph undirected_simple(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges);

  bool directed() const noexcept { return directed_; }
  bool simple() const noexcept { return !directed_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const NodeRecord> nodes() const noexcept { return nodes_; }
  std::span<const EdgeRecord> edges() const noexcept { return edges_; }
  const NodeRecord& node(NodeIndex v) const { return nodes_.at(v); }
  std::optional<NodeIndex> find(std::string_view id) const;

  /// Sorted neighbour list.
  std::span<const NodeIndex> neighbors(NodeIndex v) const { return adjacency_.at(v); }
  std::size_t degree(NodeIndex v) const { return adjacency_.at(v).size(); }
  /// Binary search on the sorted adjacency of u.
  bool adjacent(NodeIndex u, NodeIndex v) const;

  /// Declared vocabularies, collected at load time.
  const std::set<std::string>& node_types() const noexcept { return node_types_; }
  const std::set<std::string>& edge_types() const noexcept { return edge_types_; }

  /// Same structure, new node records (ids must match one-to-one by position).
  Graph with_nodes(std::vector<NodeRecord> nodes) const;

  /// Sub-graph induced by `keep` (ascending order preserved). Edge types and
  /// vocabularies carry over.
  Graph induced(std::span<const NodeIndex> keep) const;

  /// SHA-256 over a canonical text rendering of nodes and edges.
  std::string checksum() const;

 private:
  friend Graph simplify(const Graph& graph);

  void index_nodes();
  void build_adjacency();

  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::vector<NodeIndex>> adjacency_;
  std::set<std::string> node_types_;
  std::set<std::string> edge_types_;
  bool directed_ = true;
};

using NameMap = std::map<std::string, std::string, std::less<>>;

struct HydrationReport {
  std::size_t total_nodes = 0;
  /// Nodes whose id appears in the name map.
  std::size_t resolved = 0;
  double resolved_fraction = 0.0;
  /// Ids absent from the name map (they may still carry a name from the nodes file).
  std::vector<std::string> unresolved_ids;
  /// Ids with no name from either source; excluded from graphlet sampling.
  std::vector<std::string> unnamed_ids;
  std::size_t named_nodes = 0;
  std::size_t unique_names = 0;
};

struct HydrationResult {
  Graph graph;
  HydrationReport report;
};

struct DegreeHistogram {
  std::map<std::size_t, std::size_t> buckets;
  std::size_t node_count = 0;
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  double mean_degree = 0.0;
};

/// Reads the nodes and edges TSV files into a directed multigraph.
Graph load_graph(const std::filesystem::path& nodes_path, const std::filesystem::path& edges_path);

/// Reads an `id<TAB>name` TSV. Empty names are ignored; a repeated id is a
/// DuplicateIdError.
NameMap load_name_map(const std::filesystem::path& path);

HydrationResult apply_hydration(const Graph& graph, const NameMap& names);

/// Collapses directions and parallel edges, drops self-loops. The surviving
/// undirected edge keeps the lexicographically smallest edge type among the
/// rows it absorbed.
Graph simplify(const Graph& graph);

/// Single-pass degree filter on input degrees: removes every node with
/// degree < min_degree or > max_degree together with its incident edges.
Graph reduce_by_degree(const Graph& graph, std::size_t min_degree = 3, std::size_t max_degree = 100);

/// Induced sub-graph over named nodes only.
Graph drop_unnamed(const Graph& graph);

DegreeHistogram degree_histogram(const Graph& graph);

/// Writes the graph back out in the nodes/edges TSV formats.
void write_graph(const Graph& graph, const std::filesystem::path& nodes_path,
                 const std::filesystem::path& edges_path);

/// `degree<TAB>count` rows, ascending degree, with a header.
std::string histogram_tsv(const DegreeHistogram& histogram);

}  // namespace graphletqa::kg
