#include <gtest/gtest.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/kg.hpp"
#include "oracles.hpp"

using namespace graphletqa;
using namespace graphletqa::kg;

namespace {

void write_toy(const oracle::TempDir& dir) {
  oracle::write_file(dir / "nodes.tsv",
                     "id\ttype\tname\n"
                     "A\tgene\tAlpha\n"
                     "B\tgene\t\n"
                     "C\tdisease\tGamma\n"
                     "D\tdrug\t\n");
  oracle::write_file(dir / "edges.tsv",
                     "source\tedge_type\ttarget\n"
                     "A\tregulates\tB\n"
                     "B\tbinds\tA\n"
                     "A\ttreats\tC\n"
                     "C\tloops\tC\n"
                     "A\tregulates\tB\n");
  oracle::write_file(dir / "names.tsv", "id\tname\nB\tBeta\nC\tGamma prime\n");
}

}  // namespace

TEST(Graph, LoadKeepsEveryRow) {
  oracle::TempDir dir;
  write_toy(dir);
  const auto g = load_graph(dir / "nodes.tsv", dir / "edges.tsv");
  EXPECT_TRUE(g.directed());
  EXPECT_EQ(g.node_count(), 4u);
  EXPECT_EQ(g.edge_count(), 5u);
  EXPECT_EQ(g.node_types(), (std::set<std::string>{"disease", "drug", "gene"}));
  EXPECT_EQ(g.edge_types().size(), 4u);
  ASSERT_TRUE(g.find("C"));
  EXPECT_FALSE(g.find("Z"));
}

TEST(Graph, UnknownEndpointIsReferentialError) {
  oracle::TempDir dir;
  oracle::write_file(dir / "nodes.tsv", "id\ttype\tname\nA\tgene\tAlpha\n");
  oracle::write_file(dir / "edges.tsv", "source\tedge_type\ttarget\nA\tx\tQ\nR\tx\tA\n");
  try {
    load_graph(dir / "nodes.tsv", dir / "edges.tsv");
    FAIL();
  } catch (const ReferentialError& e) {
    EXPECT_EQ(e.ids(), (std::vector<std::string>{"Q", "R"}));
  }
}

TEST(Graph, DuplicateNodeId) {
  oracle::TempDir dir;
  oracle::write_file(dir / "nodes.tsv", "id\ttype\tname\nA\tgene\t\nA\tgene\t\n");
  oracle::write_file(dir / "edges.tsv", "source\tedge_type\ttarget\n");
  EXPECT_THROW(load_graph(dir / "nodes.tsv", dir / "edges.tsv"), DuplicateIdError);
}

TEST(Graph, UndirectedSimpleRejectsLoopsAndDuplicates) {
  std::vector<NodeRecord> nodes = {{"a", "t", "A"}, {"b", "t", "B"}};
  EXPECT_THROW(Graph::undirected_simple(nodes, {{0, 0, "e"}}), std::invalid_argument);
  EXPECT_THROW(Graph::undirected_simple(nodes, {{0, 1, "e"}, {1, 0, "e"}}), std::invalid_argument);
  const auto g = Graph::undirected_simple(nodes, {{1, 0, "e"}});
  EXPECT_TRUE(g.adjacent(0, 1));
  EXPECT_TRUE(g.adjacent(1, 0));
}

TEST(Preprocess, SimplifyCollapsesParallelAndLoops) {
  oracle::TempDir dir;
  write_toy(dir);
  const auto s = simplify(load_graph(dir / "nodes.tsv", dir / "edges.tsv"));
  EXPECT_TRUE(s.simple());
  EXPECT_EQ(s.edge_count(), 2u);
  for (const auto& e : s.edges()) {
    EXPECT_LT(e.source, e.target);
    if (s.node(e.target).id == "B") EXPECT_EQ(e.edge_type, "binds");
  }
  EXPECT_EQ(s.degree(*s.find("A")), 2u);
  EXPECT_EQ(s.degree(*s.find("D")), 0u);
}

TEST(Preprocess, HydrationReport) {
  oracle::TempDir dir;
  write_toy(dir);
  const auto g = load_graph(dir / "nodes.tsv", dir / "edges.tsv");
  const auto result = apply_hydration(g, load_name_map(dir / "names.tsv"));
  EXPECT_EQ(result.report.total_nodes, 4u);
  EXPECT_EQ(result.report.resolved, 2u);
  EXPECT_DOUBLE_EQ(result.report.resolved_fraction, 0.5);
  EXPECT_EQ(result.report.unresolved_ids, (std::vector<std::string>{"A", "D"}));
  EXPECT_EQ(result.report.unnamed_ids, (std::vector<std::string>{"D"}));
  EXPECT_EQ(result.report.named_nodes, 3u);
  EXPECT_EQ(result.graph.node(*result.graph.find("C")).name, "Gamma prime");
  EXPECT_EQ(result.graph.node(*result.graph.find("A")).name, "Alpha");

  const auto named = drop_unnamed(simplify(result.graph));
  EXPECT_EQ(named.node_count(), 3u);
  EXPECT_FALSE(named.find("D"));
}

TEST(Preprocess, NameMapDuplicate) {
  oracle::TempDir dir;
  oracle::write_file(dir / "names.tsv", "id\tname\nA\tx\nA\ty\n");
  EXPECT_THROW(load_name_map(dir / "names.tsv"), DuplicateIdError);
}

TEST(Preprocess, DegreeBoundariesInclusive) {
  // Star centres with 2, 3, 4 leaves; leaves have degree 1.
  oracle::Edges edges;
  int next = 3;
  for (int c = 0; c < 3; ++c) {
    for (int l = 0; l < c + 2; ++l) edges.emplace_back(c, next++);
  }
  const auto g = oracle::graph_from_edges(next, edges);
  const auto r = reduce_by_degree(g, 3, 3);
  ASSERT_EQ(r.node_count(), 1u);
  EXPECT_EQ(r.node(0).id, "n1");
  EXPECT_EQ(reduce_by_degree(g, 1, 4).node_count(), static_cast<std::size_t>(next));
  EXPECT_EQ(reduce_by_degree(g, 0, 0).node_count(), 0u);
}

TEST(Preprocess, HistogramAndRoundTrip) {
  const auto g = oracle::graph_from_edges(4, {{0, 1}, {1, 2}, {2, 0}, {2, 3}});
  const auto h = degree_histogram(g);
  EXPECT_EQ(h.buckets, (std::map<std::size_t, std::size_t>{{1, 1}, {2, 2}, {3, 1}}));
  EXPECT_EQ(h.min_degree, 1u);
  EXPECT_EQ(h.max_degree, 3u);
  EXPECT_DOUBLE_EQ(h.mean_degree, 2.0);
  EXPECT_EQ(histogram_tsv(h).substr(0, histogram_tsv(h).find('\n')), "degree\tcount");

  oracle::TempDir dir;
  write_graph(g, dir / "n.tsv", dir / "e.tsv");
  const auto back = simplify(load_graph(dir / "n.tsv", dir / "e.tsv"));
  EXPECT_EQ(back.checksum(), g.checksum());
}
