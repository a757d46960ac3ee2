#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphletqa/graphlet/shape.hpp"
#include "graphletqa/kg.hpp"

namespace graphletqa::graphlet {

/// How graphlets are drawn from a host graph.
struct SamplingPlan {
  /// Explicit RAND-ESU depth probabilities per subgraph size (k entries
  /// each). Sizes without an entry are calibrated from a pilot census:
  /// p_1..p_{k-1} = 1 and p_k = min(1, oversample * target / rarest
  /// pilot count); the reservoir then trims every shape to the quota.
  std::map<int, std::vector<double>> depth_probabilities;
  /// Per-shape quota. 0 means unlimited.
  std::uint64_t target = 10'000;
  std::uint64_t seed = 0;
  /// Leaf probability of the pilot pass; 1.0 gives an exact pilot census.
  double pilot_probability = 1.0;
  /// Headroom so the rarest over-quota shape still reaches the quota.
  double oversample = 3.0;
  std::vector<int> sizes{3, 4, 5};
  unsigned threads = 1;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

struct GraphletNode {
  std::string id;
  std::string node_type;
  std::string name;

  bool operator==(const GraphletNode&) const = default;
};

/// A sampled graphlet. Nodes are stored in canonical order, so `edges`
/// equals the edge set of shape.canonical_code.
struct Graphlet {
  std::string graphlet_id;
  ShapeId shape;
  std::vector<GraphletNode> nodes;
  std::vector<std::pair<int, int>> edges;
};

struct ShapeCensus {
  ShapeId shape;
  /// Exact occurrence count, or an unbiased RAND-ESU estimate.
  double count = 0.0;
  bool exact = true;
  /// Occurrences reached by the sampling pass (before the quota).
  std::uint64_t available = 0;
  /// Graphlets emitted after the quota.
  std::uint64_t sampled = 0;
};

struct GraphletSet {
  std::vector<Graphlet> graphlets;
  std::vector<ShapeCensus> census;
  std::map<int, std::vector<double>> depth_probabilities;
  std::string host_checksum;
};

/// Quota-sampled graphlets for every shape of the planned sizes. Nodes
/// without a name are excluded first. For each shape the output holds
/// min(target, available) graphlets; over-quota shapes are reservoir
/// downsampled in deterministic root order. Identical (graph, plan) gives
/// identical output regardless of thread count.
GraphletSet sample_per_shape(const kg::Graph& graph, const SamplingPlan& plan);

nlohmann::json to_json(const Graphlet& graphlet);
Graphlet graphlet_from_json(const nlohmann::json& j);

void write_graphlets_jsonl(const std::filesystem::path& path, const std::vector<Graphlet>& graphlets);
std::vector<Graphlet> read_graphlets_jsonl(const std::filesystem::path& path);

/// `shape_ordinal<TAB>size<TAB>exact_or_estimated_count<TAB>sampled_count`.
std::string census_tsv(const std::vector<ShapeCensus>& census);

/// Seed, probabilities, target and host checksum.
nlohmann::json sampling_manifest(const GraphletSet& set, const SamplingPlan& plan);

}  // namespace graphletqa::graphlet
