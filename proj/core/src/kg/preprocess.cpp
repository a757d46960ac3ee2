#include <algorithm>
#include <map>
#include <set>
#include <spdlog/spdlog.h>
#include <sstream>

#include "graphletqa/errors.hpp"
#include "graphletqa/kg.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::kg {

namespace fs = std::filesystem;

Graph load_graph(const fs::path& nodes_path, const fs::path& edges_path) {
  if (!fs::exists(nodes_path)) throw PathError(nodes_path, "nodes file does not exist");
  if (!fs::exists(edges_path)) throw PathError(edges_path, "edges file does not exist");

  std::vector<NodeRecord> nodes;
  std::unordered_map<std::string, NodeIndex> index;
  util::read_tsv(nodes_path, {"id", "type", "name"}, [&](const auto& f, std::size_t line) {
    if (f[0].empty()) throw ParseError(nodes_path, line, "empty node id");
    if (f[1].empty()) throw ParseError(nodes_path, line, "empty node type");
    if (!index.emplace(f[0], static_cast<NodeIndex>(nodes.size())).second) {
      throw DuplicateIdError("node", f[0]);
    }
    nodes.push_back({f[0], f[1], f[2]});
  });

  std::vector<EdgeRecord> edges;
  std::set<std::string> dangling;
  util::read_tsv(edges_path, {"source", "edge_type", "target"}, [&](const auto& f, std::size_t line) {
    if (f[1].empty()) throw ParseError(edges_path, line, "empty edge type");
    auto s = index.find(f[0]);
    auto t = index.find(f[2]);
    if (s == index.end()) dangling.insert(f[0]);
    if (t == index.end()) dangling.insert(f[2]);
    if (s != index.end() && t != index.end()) edges.push_back({s->second, t->second, f[1]});
  });
  if (!dangling.empty()) throw ReferentialError({dangling.begin(), dangling.end()});

  return Graph::directed_multigraph(std::move(nodes), std::move(edges));
}

NameMap load_name_map(const fs::path& path) {
  NameMap names;
  util::read_tsv(path, {"id", "name"}, [&](const auto& f, std::size_t line) {
    if (f[0].empty()) throw ParseError(path, line, "empty id");
    if (f[1].empty()) return;
    if (!names.emplace(f[0], f[1]).second) throw DuplicateIdError("hydration", f[0]);
  });
  return names;
}

HydrationResult apply_hydration(const Graph& graph, const NameMap& names) {
  HydrationResult result;
  auto& report = result.report;
  std::vector<NodeRecord> nodes(graph.nodes().begin(), graph.nodes().end());
  std::set<std::string_view> unique;
  for (auto& n : nodes) {
    if (auto it = names.find(n.id); it != names.end() && !it->second.empty()) {
      n.name = it->second;
      ++report.resolved;
    } else {
      report.unresolved_ids.push_back(n.id);
    }
    if (n.named()) {
      ++report.named_nodes;
    } else {
      report.unnamed_ids.push_back(n.id);
    }
  }
  for (const auto& n : nodes) {
    if (n.named()) unique.insert(n.name);
  }
  report.total_nodes = nodes.size();
  report.unique_names = unique.size();
  report.resolved_fraction =
      nodes.empty() ? 0.0 : static_cast<double>(report.resolved) / static_cast<double>(nodes.size());
  if (!report.unnamed_ids.empty()) {
    spdlog::warn("hydration: {} node(s) have no name and will not be sampled",
                 report.unnamed_ids.size());
  }
  result.graph = graph.with_nodes(std::move(nodes));
  return result;
}

Graph simplify(const Graph& graph) {
  // (min, max) pair -> smallest edge type seen
  std::map<std::pair<NodeIndex, NodeIndex>, std::string> collapsed;
  for (const auto& e : graph.edges()) {
    if (e.source == e.target) continue;
    auto key = std::minmax(e.source, e.target);
    auto [it, inserted] = collapsed.try_emplace({key.first, key.second}, e.edge_type);
    if (!inserted && e.edge_type < it->second) it->second = e.edge_type;
  }
  std::vector<EdgeRecord> edges;
  edges.reserve(collapsed.size());
  for (auto& [key, type] : collapsed) edges.push_back({key.first, key.second, type});
  std::vector<NodeRecord> nodes(graph.nodes().begin(), graph.nodes().end());
  Graph simple = Graph::undirected_simple(std::move(nodes), std::move(edges));
  // The vocabulary describes the knowledge graph, including types whose only
  // rows were self-loops.
  simple.edge_types_ = graph.edge_types_;
  return simple;
}

Graph reduce_by_degree(const Graph& graph, std::size_t min_degree, std::size_t max_degree) {
  if (min_degree > max_degree) {
    throw ConfigError("degree thresholds: min_degree " + std::to_string(min_degree) +
                      " exceeds max_degree " + std::to_string(max_degree));
  }
  std::vector<NodeIndex> keep;
  keep.reserve(graph.node_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    const auto d = graph.degree(v);
    if (d >= min_degree && d <= max_degree) keep.push_back(v);
  }
  return graph.induced(keep);
}

Graph drop_unnamed(const Graph& graph) {
  std::vector<NodeIndex> keep;
  keep.reserve(graph.node_count());
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    if (graph.node(v).named()) keep.push_back(v);
  }
  if (keep.size() == graph.node_count()) return graph;
  return graph.induced(keep);
}

DegreeHistogram degree_histogram(const Graph& graph) {
  DegreeHistogram h;
  h.node_count = graph.node_count();
  if (h.node_count == 0) return h;
  std::size_t total = 0;
  h.min_degree = SIZE_MAX;
  for (NodeIndex v = 0; v < graph.node_count(); ++v) {
    const auto d = graph.degree(v);
    ++h.buckets[d];
    total += d;
    h.min_degree = std::min(h.min_degree, d);
    h.max_degree = std::max(h.max_degree, d);
  }
  h.mean_degree = static_cast<double>(total) / static_cast<double>(h.node_count);
  return h;
}

void write_graph(const Graph& graph, const fs::path& nodes_path, const fs::path& edges_path) {
  std::string nodes = "id\ttype\tname\n";
  for (const auto& n : graph.nodes()) nodes += n.id + '\t' + n.node_type + '\t' + n.name + '\n';
  std::string edges = "source\tedge_type\ttarget\n";
  for (const auto& e : graph.edges()) {
    edges += graph.node(e.source).id + '\t' + e.edge_type + '\t' + graph.node(e.target).id + '\n';
  }
  util::write_text_file(nodes_path, nodes);
  util::write_text_file(edges_path, edges);
}

std::string histogram_tsv(const DegreeHistogram& histogram) {
  std::ostringstream out;
  out << "degree\tcount\n";
  for (const auto& [degree, count] : histogram.buckets) out << degree << '\t' << count << '\n';
  return out.str();
}

}  // namespace graphletqa::kg
