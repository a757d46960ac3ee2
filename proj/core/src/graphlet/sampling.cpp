#include "graphletqa/graphlet/sampling.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <spdlog/spdlog.h>
#include <sstream>

#include "graphletqa/errors.hpp"
#include "graphletqa/graphlet/esu.hpp"
#include "graphletqa/util/io.hpp"
#include "graphletqa/util/random.hpp"

namespace graphletqa::graphlet {

using kg::NodeIndex;
using VertexSet = std::array<NodeIndex, kMaxShapeSize>;

namespace {

constexpr std::size_t kBlock = 128;

struct Occurrence {
  std::uint32_t raw_code;
  VertexSet vertices;
};

struct Reservoir {
  explicit Reservoir(std::uint64_t seed) : rng(seed) {}

  void offer(const VertexSet& vs, std::uint64_t capacity) {
    ++seen;
    if (capacity == 0 || items.size() < capacity) {
      items.push_back(vs);
      return;
    }
    const auto j = rng.below(seen);
    if (j < capacity) items[j] = vs;
  }

  std::uint64_t seen = 0;
  std::vector<VertexSet> items;
  util::Rng rng;
};

double product(const std::vector<double>& ps) {
  return std::accumulate(ps.begin(), ps.end(), 1.0, std::multiplies<>());
}

// Runs RAND-ESU root blocks in parallel waves and hands occurrences to
// `sink` in root order.
void stream_occurrences(const kg::Graph& g, int k, const std::vector<double>& probs, std::uint64_t seed,
                        unsigned threads, const std::function<void(const Occurrence&)>& sink) {
  const std::size_t roots = g.node_count();
  const std::size_t blocks = (roots + kBlock - 1) / kBlock;
  const std::size_t wave = std::max<std::size_t>(1, threads) * 4;
  for (std::size_t first = 0; first < blocks; first += wave) {
    const std::size_t count = std::min(wave, blocks - first);
    std::vector<std::vector<Occurrence>> results(count);
    const std::size_t root_begin = first * kBlock;
    const std::size_t root_end = std::min(roots, (first + count) * kBlock);
    for_each_root_parallel(
        root_end - root_begin, threads,
        [&](std::size_t block, std::size_t begin, std::size_t end) {
          auto& out = results[block];
          for (std::size_t r = root_begin + begin; r < root_begin + end; ++r) {
            sample_rand_esu_root(g, k, probs, seed, static_cast<NodeIndex>(r),
                                 [&](std::span<const NodeIndex> vs) {
                                   Occurrence occ{induced_small_graph(g, vs).code(), {}};
                                   std::copy(vs.begin(), vs.end(), occ.vertices.begin());
                                   out.push_back(occ);
                                 });
          }
        },
        kBlock);
    for (const auto& block : results) {
      for (const auto& occ : block) sink(occ);
    }
  }
}

std::map<ShapeId, double> pilot_census(const kg::Graph& g, int k, const SamplingPlan& plan, bool& exact) {
  std::map<ShapeId, double> counts;
  if (plan.pilot_probability >= 1.0) {
    exact = true;
    for (auto [shape, n] : count_shapes(g, k, plan.threads)) counts[shape] = static_cast<double>(n);
    return counts;
  }
  exact = false;
  std::vector<double> probs(static_cast<std::size_t>(k), 1.0);
  probs.back() = plan.pilot_probability;
  std::map<std::uint32_t, std::uint64_t> raw;
  stream_occurrences(g, k, probs, util::derive_seed(plan.seed, 0x9000 + k), plan.threads,
                     [&](const Occurrence& occ) { ++raw[occ.raw_code]; });
  for (auto [code, n] : raw) {
    counts[canonical_form(SmallGraph(k, code))] += static_cast<double>(n) / plan.pilot_probability;
  }
  return counts;
}

Graphlet build_graphlet(const kg::Graph& g, const ShapeId& shape, VertexSet vs, std::size_t index) {
  const auto n = static_cast<std::size_t>(shape.size);
  std::sort(vs.begin(), vs.begin() + static_cast<std::ptrdiff_t>(n));
  const std::span<const NodeIndex> sorted(vs.data(), n);
  const auto label = canonical_label(induced_small_graph(g, sorted));
  Graphlet out;
  char id[32];
  std::snprintf(id, sizeof id, "g%02d-%06zu", shape.ordinal, index);
  out.graphlet_id = id;
  out.shape = shape;
  for (std::size_t c = 0; c < n; ++c) {
    const auto& node = g.node(sorted[label.order[c]]);
    out.nodes.push_back({node.id, node.node_type, node.name});
  }
  out.edges = SmallGraph(shape.size, shape.canonical_code).edges();
  return out;
}

}  // namespace

void SamplingPlan::validate() const {
  for (int k : sizes) {
    if (k < kMinShapeSize || k > kMaxShapeSize) {
      throw ConfigError("sampling size " + std::to_string(k) + " outside 3..5");
    }
  }
  for (const auto& [k, probs] : depth_probabilities) {
    if (static_cast<int>(probs.size()) != k) {
      throw ConfigError("size " + std::to_string(k) + " needs " + std::to_string(k) + " depth probabilities");
    }
    for (double p : probs) {
      if (!(p > 0.0 && p <= 1.0)) throw ConfigError("depth probabilities must lie in (0, 1]");
    }
  }
  if (!(pilot_probability > 0.0 && pilot_probability <= 1.0)) {
    throw ConfigError("pilot probability must lie in (0, 1]");
  }
  if (!(oversample >= 1.0)) throw ConfigError("oversample must be at least 1");
}

GraphletSet sample_per_shape(const kg::Graph& graph, const SamplingPlan& plan) {
  plan.validate();
  if (!graph.simple()) throw ConfigError("graphlet sampling requires a simplified graph");
  const kg::Graph g = kg::drop_unnamed(graph);

  GraphletSet set;
  set.host_checksum = graph.checksum();
  std::vector<int> sizes = plan.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  for (int k : sizes) {
    std::map<ShapeId, double> estimate;
    bool exact = false;
    std::vector<double> probs;
    if (auto it = plan.depth_probabilities.find(k); it != plan.depth_probabilities.end()) {
      probs = it->second;
    } else {
      estimate = pilot_census(g, k, plan, exact);
      probs.assign(static_cast<std::size_t>(k), 1.0);
      if (plan.target > 0 && !estimate.empty()) {
        double rarest = std::numeric_limits<double>::infinity();
        for (const auto& [shape, n] : estimate) {
          if (n > 0) rarest = std::min(rarest, n);
        }
        probs.back() = std::min(1.0, plan.oversample * static_cast<double>(plan.target) / rarest);
      }
    }
    set.depth_probabilities[k] = probs;

    std::map<int, Reservoir> reservoirs;
    for (const auto& shape : shape_catalog()) {
      if (shape.size == k) {
        reservoirs.emplace(shape.ordinal, Reservoir(util::derive_seed(plan.seed, 0x5000 + shape.ordinal)));
      }
    }
    stream_occurrences(g, k, probs, util::derive_seed(plan.seed, k), plan.threads,
                       [&](const Occurrence& occ) {
                         const auto shape = canonical_form(SmallGraph(k, occ.raw_code));
                         reservoirs.at(shape.ordinal).offer(occ.vertices, plan.target);
                       });

    const double q = product(probs);
    const bool from_pilot = !plan.depth_probabilities.contains(k);
    for (const auto& shape : shape_catalog()) {
      if (shape.size != k) continue;
      auto& res = reservoirs.at(shape.ordinal);
      ShapeCensus c;
      c.shape = shape;
      c.available = res.seen;
      if (from_pilot) {
        auto it = estimate.find(shape);
        c.count = it == estimate.end() ? 0.0 : it->second;
        c.exact = exact;
      } else {
        c.count = static_cast<double>(res.seen) / q;
        c.exact = q >= 1.0;
      }

      auto& items = res.items;
      for (auto& vs : items) std::sort(vs.begin(), vs.begin() + k);
      std::sort(items.begin(), items.end());
      for (std::size_t i = 0; i < items.size(); ++i) {
        set.graphlets.push_back(build_graphlet(g, shape, items[i], i));
      }
      c.sampled = items.size();
      set.census.push_back(c);
    }
  }
  if (set.graphlets.empty()) spdlog::warn("graphlet sampling produced no graphlets");
  return set;
}

nlohmann::json to_json(const Graphlet& graphlet) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graphlet.nodes) {
    nodes.push_back({{"id", n.id}, {"type", n.node_type}, {"name", n.name}});
  }
  nlohmann::json edges = nlohmann::json::array();
  for (auto [i, j] : graphlet.edges) edges.push_back({i, j});
  return {{"graphlet_id", graphlet.graphlet_id},
          {"shape_ordinal", graphlet.shape.ordinal},
          {"shape_size", graphlet.shape.size},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

Graphlet graphlet_from_json(const nlohmann::json& j) {
  Graphlet g;
  g.graphlet_id = j.at("graphlet_id").get<std::string>();
  g.shape = shape_by_ordinal(j.at("shape_ordinal").get<int>());
  if (j.at("shape_size").get<int>() != g.shape.size) {
    throw SerializationError("graphlet " + g.graphlet_id + ": shape_size disagrees with shape_ordinal");
  }
  for (const auto& n : j.at("nodes")) {
    g.nodes.push_back({n.at("id").get<std::string>(), n.at("type").get<std::string>(),
                       n.at("name").get<std::string>()});
  }
  for (const auto& e : j.at("edges")) g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  if (static_cast<int>(g.nodes.size()) != g.shape.size) {
    throw SerializationError("graphlet " + g.graphlet_id + ": node count disagrees with shape");
  }
  return g;
}

void write_graphlets_jsonl(const std::filesystem::path& path, const std::vector<Graphlet>& graphlets) {
  std::string text;
  for (const auto& g : graphlets) text += util::dump_line(to_json(g)) + '\n';
  util::write_text_file(path, text);
}

std::vector<Graphlet> read_graphlets_jsonl(const std::filesystem::path& path) {
  std::vector<Graphlet> out;
  util::read_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(graphlet_from_json(j));
    } catch (const std::exception& e) {
      throw ParseError(path, line, e.what());
    }
  });
  return out;
}

std::string census_tsv(const std::vector<ShapeCensus>& census) {
  std::ostringstream out;
  out << "shape_ordinal\tsize\texact_or_estimated_count\tsampled_count\n";
  char buf[64];
  for (const auto& c : census) {
    if (c.exact) {
      std::snprintf(buf, sizeof buf, "%.0f", c.count);
    } else {
      std::snprintf(buf, sizeof buf, "%.3f", c.count);
    }
    out << c.shape.ordinal << '\t' << c.shape.size << '\t' << buf << '\t' << c.sampled << '\n';
  }
  return out.str();
}

nlohmann::json sampling_manifest(const GraphletSet& set, const SamplingPlan& plan) {
  nlohmann::json probs = nlohmann::json::object();
  nlohmann::json modes = nlohmann::json::object();
  for (const auto& [k, ps] : set.depth_probabilities) probs[std::to_string(k)] = ps;
  for (const auto& c : set.census) modes[std::to_string(c.shape.size)] = c.exact ? "exact" : "estimated";
  return {{"seed", plan.seed},
          {"target", plan.target},
          {"pilot_probability", plan.pilot_probability},
          {"oversample", plan.oversample},
          {"depth_probabilities", std::move(probs)},
          {"census_mode", std::move(modes)},
          {"vertex_order", "load order of node ids"},
          {"host_checksum", set.host_checksum},
          {"graphlet_count", set.graphlets.size()}};
}

}  // namespace graphletqa::graphlet
