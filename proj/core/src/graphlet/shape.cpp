#include "graphletqa/graphlet/shape.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "graphletqa/errors.hpp"

namespace graphletqa::graphlet {

namespace {

struct TableEntry {
  std::uint32_t canonical = 0;
  std::array<std::uint8_t, kMaxShapeSize> order{};
  bool connected = false;
};

struct SizeTable {
  std::vector<TableEntry> entries;
};

struct Tables {
  std::array<SizeTable, kMaxShapeSize + 1> by_size;
  std::vector<ShapeId> catalog;
};

Tables build_tables() {
  Tables t;
  for (int n = kMinShapeSize; n <= kMaxShapeSize; ++n) {
    std::vector<std::array<std::uint8_t, kMaxShapeSize>> perms;
    std::array<std::uint8_t, kMaxShapeSize> p{};
    std::iota(p.begin(), p.begin() + n, std::uint8_t{0});
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.begin() + n));

    auto& table = t.by_size[n].entries;
    const std::uint32_t codes = 1u << SmallGraph::pair_count(n);
    table.resize(codes);
    for (std::uint32_t code = 0; code < codes; ++code) {
      const SmallGraph g(n, code);
      auto& entry = table[code];
      entry.connected = g.connected();
      entry.canonical = UINT32_MAX;
      for (const auto& perm : perms) {
        const auto c = g.permuted(perm).code();
        if (c < entry.canonical) {
          entry.canonical = c;
          entry.order = perm;
        }
      }
    }
    std::vector<std::uint32_t> classes;
    for (std::uint32_t code = 0; code < codes; ++code) {
      if (table[code].connected && table[code].canonical == code) classes.push_back(code);
    }
    for (auto c : classes) t.catalog.push_back({n, c, 0});
  }
  std::sort(t.catalog.begin(), t.catalog.end());
  for (std::size_t i = 0; i < t.catalog.size(); ++i) t.catalog[i].ordinal = static_cast<int>(i) + 1;
  return t;
}

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

}  // namespace

SmallGraph::SmallGraph(int size, std::uint32_t code) : size_(size), code_(code) {
  if (size < 1 || size > kMaxShapeSize) throw std::invalid_argument("SmallGraph: size must be 1..5");
  if (code >> pair_count(size)) throw std::invalid_argument("SmallGraph: code has stray bits");
}

SmallGraph SmallGraph::from_matrix(const std::vector<std::vector<bool>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  if (n < 1 || n > kMaxShapeSize) throw std::invalid_argument("adjacency must be 1..5 square");
  std::uint32_t code = 0;
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(adjacency[i].size()) != n) throw std::invalid_argument("adjacency not square");
    if (adjacency[i][i]) throw std::invalid_argument("adjacency diagonal must be zero");
    for (int j = i + 1; j < n; ++j) {
      if (adjacency[i][j] != adjacency[j][i]) throw std::invalid_argument("adjacency not symmetric");
      if (adjacency[i][j]) code |= 1u << pair_bit(i, j, n);
    }
  }
  return SmallGraph(n, code);
}

SmallGraph SmallGraph::from_edges(int size, const std::vector<std::pair<int, int>>& edges) {
  std::uint32_t code = 0;
  for (auto [i, j] : edges) {
    if (i == j || i < 0 || j < 0 || i >= size || j >= size) {
      throw std::invalid_argument("from_edges: bad vertex pair");
    }
    code |= 1u << pair_bit(i, j, size);
  }
  return SmallGraph(size, code);
}

bool SmallGraph::adjacent(int i, int j) const {
  if (i == j) return false;
  return (code_ >> pair_bit(i, j, size_)) & 1u;
}

int SmallGraph::edge_count() const noexcept { return __builtin_popcount(code_); }

bool SmallGraph::connected() const noexcept {
  unsigned seen = 1;
  unsigned frontier = 1;
  while (frontier) {
    unsigned next = 0;
    for (int v = 0; v < size_; ++v) {
      if (!(frontier >> v & 1u)) continue;
      for (int u = 0; u < size_; ++u) {
        if (u != v && adjacent(u, v) && !(seen >> u & 1u)) next |= 1u << u;
      }
    }
    seen |= next;
    frontier = next;
  }
  return seen == (1u << size_) - 1;
}

std::vector<std::pair<int, int>> SmallGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < size_; ++i) {
    for (int j = i + 1; j < size_; ++j) {
      if (adjacent(i, j)) out.emplace_back(i, j);
    }
  }
  return out;
}

SmallGraph SmallGraph::permuted(const std::array<std::uint8_t, kMaxShapeSize>& order) const {
  std::uint32_t code = 0;
  for (int a = 0; a < size_; ++a) {
    for (int b = a + 1; b < size_; ++b) {
      if (adjacent(order[a], order[b])) code |= 1u << pair_bit(a, b, size_);
    }
  }
  return SmallGraph(size_, code);
}

const std::vector<ShapeId>& shape_catalog() { return tables().catalog; }

const ShapeId& shape_by_ordinal(int ordinal) {
  const auto& catalog = shape_catalog();
  if (ordinal < 1 || ordinal > static_cast<int>(catalog.size())) {
    throw std::out_of_range("shape ordinal " + std::to_string(ordinal) + " outside 1..29");
  }
  return catalog[static_cast<std::size_t>(ordinal) - 1];
}

CanonicalLabel canonical_label(const SmallGraph& graph) {
  const int n = graph.size();
  if (n < kMinShapeSize || n > kMaxShapeSize) {
    throw ClassificationError("graphlet size " + std::to_string(n) + " outside 3..5");
  }
  const auto& entry = tables().by_size[n].entries[graph.code()];
  if (!entry.connected) throw ClassificationError("cannot classify a disconnected graph");
  const auto& catalog = shape_catalog();
  const ShapeId probe{n, entry.canonical, 0};
  auto it = std::lower_bound(catalog.begin(), catalog.end(), probe);
  return {*it, entry.order};
}

ShapeId canonical_form(const SmallGraph& graph) { return canonical_label(graph).shape; }

std::string shape_label(const ShapeId& shape) {
  const SmallGraph g(shape.size, shape.canonical_code);
  const int n = g.size();
  const int m = g.edge_count();
  std::vector<int> degrees(n, 0);
  for (auto [i, j] : g.edges()) {
    ++degrees[i];
    ++degrees[j];
  }
  std::sort(degrees.begin(), degrees.end(), std::greater<>());
  const int max_deg = degrees.front();
  if (m == n * (n - 1) / 2) return "K" + std::to_string(n);
  if (m == n - 1 && max_deg == 2) return std::to_string(n) + "-path";
  if (m == n - 1 && max_deg == n - 1) return std::to_string(n) + "-star";
  if (m == n && std::all_of(degrees.begin(), degrees.end(), [](int d) { return d == 2; })) {
    return std::to_string(n) + "-cycle";
  }
  std::string label = std::to_string(n) + "v" + std::to_string(m) + "e[";
  for (int i = 0; i < n; ++i) label += std::to_string(degrees[i]);
  // Degree sequences alone collide for a few 5-vertex shapes.
  return label + "]#" + std::to_string(canonical_form(g).ordinal);
}

}  // namespace graphletqa::graphlet
