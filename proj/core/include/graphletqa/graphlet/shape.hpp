#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace graphletqa::graphlet {

inline constexpr int kMinShapeSize = 3;
inline constexpr int kMaxShapeSize = 5;
inline constexpr int kShapeCount = 29;

/// Isomorphism class of a connected graph on 3..5 vertices.
///
/// canonical_code is the minimum, over all vertex permutations, of the
/// upper-triangle adjacency bitcode (see SmallGraph::pair_bit). ordinal is
/// the 1-based position in shape_catalog().
struct ShapeId {
  int size = 0;
  std::uint32_t canonical_code = 0;
  int ordinal = 0;

  auto operator<=>(const ShapeId& other) const {
    return std::tie(size, canonical_code) <=> std::tie(other.size, other.canonical_code);
  }
  bool operator==(const ShapeId& other) const {
    return size == other.size && canonical_code == other.canonical_code;
  }
};

/// Undirected graph on at most five vertices stored as an upper-triangle
/// bitcode. Bit pair_bit(i, j, n) is set iff i and j are adjacent.
class SmallGraph {
 public:
  SmallGraph(int size, std::uint32_t code);

  /// Validates a square, symmetric, zero-diagonal boolean matrix of
  /// dimension 1..5. Throws std::invalid_argument otherwise.
  static SmallGraph from_matrix(const std::vector<std::vector<bool>>& adjacency);
  static SmallGraph from_edges(int size, const std::vector<std::pair<int, int>>& edges);

  static constexpr int pair_bit(int i, int j, int n) {
    if (i > j) std::swap(i, j);
    return i * (2 * n - i - 1) / 2 + (j - i - 1);
  }
  static constexpr int pair_count(int n) { return n * (n - 1) / 2; }

  int size() const noexcept { return size_; }
  std::uint32_t code() const noexcept { return code_; }
  bool adjacent(int i, int j) const;
  int edge_count() const noexcept;
  bool connected() const noexcept;
  std::vector<std::pair<int, int>> edges() const;

  /// Graph obtained by placing original vertex order[c] at position c.
  SmallGraph permuted(const std::array<std::uint8_t, kMaxShapeSize>& order) const;

 private:
  int size_;
  std::uint32_t code_;
};

/// Canonical class plus the vertex order realising it: placing original
/// vertex order[c] at position c yields exactly shape.canonical_code.
struct CanonicalLabel {
  ShapeId shape;
  std::array<std::uint8_t, kMaxShapeSize> order{};
};

/// All 29 connected shapes on 3..5 vertices, ordered by (size, canonical_code).
const std::vector<ShapeId>& shape_catalog();

/// Catalog entry by 1-based ordinal; throws std::out_of_range.
const ShapeId& shape_by_ordinal(int ordinal);

/// Table lookup; throws ClassificationError for a disconnected graph or a
/// size outside 3..5.
ShapeId canonical_form(const SmallGraph& graph);
CanonicalLabel canonical_label(const SmallGraph& graph);

/// Human-readable label such as "5-path" or "K4", unique per shape. Stable,
/// used in reports.
std::string shape_label(const ShapeId& shape);

}  // namespace graphletqa::graphlet
