#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "graphletqa/errors.hpp"
#include "graphletqa/kg.hpp"
#include "graphletqa/util/hash.hpp"

namespace graphletqa::kg {

Graph Graph::directed_multigraph(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges) {
  Graph g;
  g.directed_ = true;
  g.nodes_ = std::move(nodes);
  g.index_nodes();
  for (const auto& e : edges) {
    if (e.source >= g.nodes_.size() || e.target >= g.nodes_.size()) {
      throw ReferentialError({"#" + std::to_string(std::max(e.source, e.target))});
    }
  }
  g.edges_ = std::move(edges);
  g.build_adjacency();
  return g;
}

Graph Graph::undirected_simple(std::vector<NodeRecord> nodes, std::vector<EdgeRecord> edges) {
  Graph g;
  g.directed_ = false;
  g.nodes_ = std::move(nodes);
  g.index_nodes();
  for (auto& e : edges) {
    if (e.source >= g.nodes_.size() || e.target >= g.nodes_.size()) {
      throw ReferentialError({"#" + std::to_string(std::max(e.source, e.target))});
    }
    if (e.source == e.target) throw std::invalid_argument("self-loop in simple graph");
    if (e.source > e.target) std::swap(e.source, e.target);
  }
  std::sort(edges.begin(), edges.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].source == edges[i - 1].source && edges[i].target == edges[i - 1].target) {
      throw std::invalid_argument("parallel edge in simple graph");
    }
  }
  g.edges_ = std::move(edges);
  g.build_adjacency();
  return g;
}

void Graph::index_nodes() {
  index_.clear();
  index_.reserve(nodes_.size());
  node_types_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!index_.emplace(n.id, static_cast<NodeIndex>(i)).second) {
      throw DuplicateIdError("node", n.id);
    }
    node_types_.insert(n.node_type);
  }
}

void Graph::build_adjacency() {
  adjacency_.assign(nodes_.size(), {});
  edge_types_.clear();
  for (const auto& e : edges_) {
    edge_types_.insert(e.edge_type);
    adjacency_[e.source].push_back(e.target);
    if (!directed_) adjacency_[e.target].push_back(e.source);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

std::optional<NodeIndex> Graph::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Graph::adjacent(NodeIndex u, NodeIndex v) const {
  const auto& list = adjacency_.at(u);
  return std::binary_search(list.begin(), list.end(), v);
}

Graph Graph::with_nodes(std::vector<NodeRecord> nodes) const {
  if (nodes.size() != nodes_.size()) throw std::invalid_argument("with_nodes: size mismatch");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id != nodes_[i].id) throw std::invalid_argument("with_nodes: id mismatch");
  }
  Graph g = *this;
  g.nodes_ = std::move(nodes);
  g.node_types_.clear();
  for (const auto& n : g.nodes_) g.node_types_.insert(n.node_type);
  return g;
}

Graph Graph::induced(std::span<const NodeIndex> keep) const {
  constexpr auto kDropped = static_cast<NodeIndex>(-1);
  std::vector<NodeIndex> remap(nodes_.size(), kDropped);
  std::vector<NodeRecord> nodes;
  nodes.reserve(keep.size());
  for (NodeIndex v : keep) {
    remap.at(v) = static_cast<NodeIndex>(nodes.size());
    nodes.push_back(nodes_[v]);
  }
  std::vector<EdgeRecord> edges;
  for (const auto& e : edges_) {
    if (remap[e.source] == kDropped || remap[e.target] == kDropped) continue;
    edges.push_back({remap[e.source], remap[e.target], e.edge_type});
  }
  Graph g = directed_ ? directed_multigraph(std::move(nodes), std::move(edges))
                      : undirected_simple(std::move(nodes), std::move(edges));
  // Vocabularies describe the knowledge graph, not the surviving subset.
  g.node_types_ = node_types_;
  g.edge_types_ = edge_types_;
  return g;
}

std::string Graph::checksum() const {
  std::string text;
  text += directed_ ? "directed\n" : "undirected\n";
  for (const auto& n : nodes_) {
    text += n.id + '\t' + n.node_type + '\t' + n.name + '\n';
  }
  text += "--\n";
  for (const auto& e : edges_) {
    text += nodes_[e.source].id + '\t' + e.edge_type + '\t' + nodes_[e.target].id + '\n';
  }
  return util::sha256_hex(text);
}

}  // namespace graphletqa::kg
