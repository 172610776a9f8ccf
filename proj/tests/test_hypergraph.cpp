#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "support.hpp"
#include "tahg/hypergraph.hpp"

namespace tahg {
namespace {

using test::random_hypergraph;

TEST(BuildHypergraph, SingleEdgeDegrees) {
  const auto hg = build_hypergraph(3, {{0, 1, 2}});
  EXPECT_EQ(hg.num_nodes(), 3u);
  EXPECT_EQ(hg.num_edges(), 1u);
  for (NodeId v = 0; v < 3; ++v) EXPECT_DOUBLE_EQ(hg.node_degree(v), 1.0);
  EXPECT_EQ(hg.edge_degree(0), 3u);
  EXPECT_DOUBLE_EQ(hg.weight(0), 1.0);
}

TEST(BuildHypergraph, CiteseerShapedCounts) {
  // 1778 nodes and 2118 two-member hyperedges, in the shape of a co-citation set.
  Rng rng(11);
  auto edges = test::random_edge_lists(1778, 2118, 2, 2, rng);
  const auto hg = build_hypergraph(1778, edges);
  EXPECT_EQ(hg.num_nodes(), 1778u);
  EXPECT_EQ(hg.num_edges(), 2118u);
  double total = 0.0;
  for (EdgeId e = 0; e < hg.num_edges(); ++e) total += static_cast<double>(hg.edge_degree(e));
  EXPECT_DOUBLE_EQ(total / 2118.0, 2.0);
}

TEST(BuildHypergraph, DegreesMatchIncidenceRecount) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto edges = test::random_edge_lists(5, 4, 1, 4, rng);
    std::vector<double> weights{0.5, 1.0, 2.0, 3.5};
    const auto hg = build_hypergraph(5, edges, weights);
    const Matrix h = test::dense_incidence(hg.incidence());
    for (NodeId v = 0; v < 5; ++v) {
      double d = 0.0;
      for (EdgeId e = 0; e < 4; ++e) d += weights[e] * h(v, e);
      EXPECT_DOUBLE_EQ(hg.node_degree(v), d);
    }
    for (EdgeId e = 0; e < 4; ++e) EXPECT_EQ(static_cast<double>(hg.edge_degree(e)), h.col(e).sum());
  }
}

TEST(BuildHypergraph, HandshakeIdentity) {
  Rng rng(3);
  const auto hg = random_hypergraph(30, 25, 1, 6, rng);
  double node_sum = 0.0;
  for (NodeId v = 0; v < hg.num_nodes(); ++v) node_sum += hg.node_degree(v);
  double edge_sum = 0.0;
  for (EdgeId e = 0; e < hg.num_edges(); ++e) edge_sum += static_cast<double>(hg.edge_degree(e));
  EXPECT_DOUBLE_EQ(node_sum, edge_sum);
}

TEST(BuildHypergraph, Errors) {
  EXPECT_TAHG_ERROR(build_hypergraph(3, {{0, 1}, {}}), ErrorCode::EmptyHyperedge);
  EXPECT_TAHG_ERROR(build_hypergraph(3, {{0, 3}}), ErrorCode::NodeIdOutOfRange);
  EXPECT_TAHG_ERROR(build_hypergraph(3, {{0, 1}}, std::vector<double>{0.0}), ErrorCode::NonPositiveWeight);
  EXPECT_TAHG_ERROR(build_hypergraph(3, {{0, 1}}, std::vector<double>{-1.0}), ErrorCode::NonPositiveWeight);
}

TEST(BuildHypergraph, KeepsOrderAndDuplicateColumns) {
  const auto hg = build_hypergraph(4, {{2, 3}, {0, 1}, {0, 1}, {1, 1, 0}});
  ASSERT_EQ(hg.num_edges(), 4u);
  EXPECT_EQ(hg.members(0)[0], 2u);
  EXPECT_EQ(hg.edge_degree(3), 2u);  // repeated id collapses
  EXPECT_DOUBLE_EQ(hg.node_degree(0), 3.0);
}

TEST(OneHopNeighbors, SharedHyperedge) {
  const auto hg = build_hypergraph(4, {{0, 1, 2}});
  EXPECT_EQ(one_hop_neighbors(hg, 0), (std::vector<NodeId>{1, 2}));
  EXPECT_TRUE(one_hop_neighbors(hg, 3).empty());
  EXPECT_TAHG_ERROR(one_hop_neighbors(hg, 4), ErrorCode::NodeIdOutOfRange);
}

TEST(OneHopNeighbors, MatchesMembershipScan) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto hg = random_hypergraph(8, 6, 1, 4, rng);
    for (NodeId v = 0; v < 8; ++v) {
      std::set<NodeId> expect;
      for (EdgeId e = 0; e < hg.num_edges(); ++e) {
        const auto m = hg.members(e);
        if (std::find(m.begin(), m.end(), v) == m.end()) continue;
        for (NodeId u : m) {
          if (u != v) expect.insert(u);
        }
      }
      const auto got = one_hop_neighbors(hg, v);
      EXPECT_EQ(got, std::vector<NodeId>(expect.begin(), expect.end()));
      EXPECT_EQ(std::count(got.begin(), got.end(), v), 0);
    }
  }
}

TEST(SAdjacency, LargeSGivesNothing) {
  Rng rng(5);
  const auto hg = random_hypergraph(10, 8, 1, 3, rng);
  for (EdgeId e = 0; e < hg.num_edges(); ++e) EXPECT_TRUE(s_adjacent_hyperedges(hg, e, 4).empty());
}

TEST(SAdjacency, Errors) {
  const auto hg = build_hypergraph(3, {{0, 1}});
  EXPECT_TAHG_ERROR(s_adjacent_hyperedges(hg, 1, 1), ErrorCode::HyperedgeIdOutOfRange);
  EXPECT_TAHG_ERROR(s_adjacent_hyperedges(hg, 0, 0), ErrorCode::InvalidS);
}

// Five hyperedges around a center node where a 2-walk can visit e1, e3, e4, e5
// in that order while e2 only touches e1 in a single node.
TEST(SAdjacency, WalkTopologyExample) {
  //            e1         e2      e3         e4         e5
  const auto hg = build_hypergraph(10, {{0, 1, 2}, {2, 3}, {1, 2, 4}, {2, 4, 5, 6}, {5, 6, 7}});
  const auto adj1 = s_adjacent_hyperedges(hg, 0, 2);
  EXPECT_NE(std::find(adj1.begin(), adj1.end(), 2u), adj1.end());
  EXPECT_EQ(std::find(adj1.begin(), adj1.end(), 1u), adj1.end());
  const auto adj3 = s_adjacent_hyperedges(hg, 2, 2);
  EXPECT_NE(std::find(adj3.begin(), adj3.end(), 3u), adj3.end());
  const auto adj4 = s_adjacent_hyperedges(hg, 3, 2);
  EXPECT_NE(std::find(adj4.begin(), adj4.end(), 4u), adj4.end());
}

TEST(SAdjacency, SymmetricAndMonotoneInS) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto hg = random_hypergraph(12, 10, 1, 6, rng);
    for (std::size_t s = 1; s <= 4; ++s) {
      for (EdgeId e = 0; e < hg.num_edges(); ++e) {
        const auto here = s_adjacent_hyperedges(hg, e, s);
        for (EdgeId f : here) {
          const auto back = s_adjacent_hyperedges(hg, f, s);
          EXPECT_TRUE(std::binary_search(back.begin(), back.end(), e));
        }
        const auto tighter = s_adjacent_hyperedges(hg, e, s + 1);
        EXPECT_TRUE(std::includes(here.begin(), here.end(), tighter.begin(), tighter.end()));
      }
    }
  }
}

TEST(Reconstruct, Triangle) {
  const PairwiseGraph g(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_EQ(reconstruct_from_graph(g), (std::vector<std::vector<NodeId>>{{0, 1, 2}}));
}

TEST(Reconstruct, Path) {
  const PairwiseGraph g(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(reconstruct_from_graph(g), (std::vector<std::vector<NodeId>>{{0, 1}, {1, 2}}));
}

TEST(Reconstruct, EmptyGraph) {
  const PairwiseGraph g(4, {});
  EXPECT_TRUE(reconstruct_from_graph(g).empty());
}

TEST(Reconstruct, InvalidGraph) {
  EXPECT_TAHG_ERROR(PairwiseGraph(3, {{1, 1}}), ErrorCode::InvalidGraph);
  EXPECT_TAHG_ERROR(PairwiseGraph(3, {{0, 3}}), ErrorCode::InvalidGraph);
}

TEST(Reconstruct, MatchesExhaustiveEnumeration) {
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.uniform_index(11);
    const auto pairs = test::random_pairs(n, rng.uniform01(), rng);
    EXPECT_EQ(reconstruct_from_graph(PairwiseGraph(n, pairs)), test::brute_force_cliques(n, pairs)) << "seed " << seed;
  }
}

TEST(Reconstruct, CliqueProperties) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const std::size_t n = 6 + rng.uniform_index(7);
    const auto pairs = test::random_pairs(n, 0.2 + 0.6 * rng.uniform01(), rng);
    const PairwiseGraph g(n, pairs);
    const auto cliques = reconstruct_from_graph(g);
    EXPECT_TRUE(std::is_sorted(cliques.begin(), cliques.end()));
    for (const auto& c : cliques) {
      for (std::size_t i = 0; i < c.size(); ++i) {
        for (std::size_t j = i + 1; j < c.size(); ++j) EXPECT_TRUE(g.has_edge(c[i], c[j]));
      }
      for (const auto& d : cliques) {
        if (&c != &d) EXPECT_FALSE(std::includes(d.begin(), d.end(), c.begin(), c.end()));
      }
    }
    for (auto [u, v] : pairs) {
      const bool covered = std::any_of(cliques.begin(), cliques.end(), [u = u, v = v](const auto& c) {
        return std::binary_search(c.begin(), c.end(), u) && std::binary_search(c.begin(), c.end(), v);
      });
      EXPECT_TRUE(covered);
    }
  }
}

}  // namespace
}  // namespace tahg
