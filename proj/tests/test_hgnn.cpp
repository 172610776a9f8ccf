#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "support.hpp"
#include "tahg/hgnn.hpp"

namespace tahg {
namespace {

HgnnParams identity_params(std::size_t d) {
  HgnnParams p;
  HgnnLayer layer;
  layer.theta_e = Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  layer.b_e = RowVector::Zero(static_cast<Eigen::Index>(d));
  layer.theta_v = layer.theta_e;
  layer.b_v = layer.b_e;
  p.layers.push_back(layer);
  return p;
}

HgnnParams random_params(const HgnnDims& dims, std::uint64_t seed) {
  Rng rng(seed);
  HgnnParams p = HgnnParams::init(dims, rng);
  // Spread the slopes and biases away from their defaults so every block matters.
  for (auto& layer : p.layers) {
    layer.slope_e = 0.1 + 0.5 * rng.uniform01();
    layer.slope_v = 0.1 + 0.5 * rng.uniform01();
    layer.b_e = test::random_matrix(1, layer.b_e.size(), rng, 0.3).row(0);
    layer.b_v = test::random_matrix(1, layer.b_v.size(), rng, 0.3).row(0);
  }
  return p;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

TEST(HgnnForward, SingleNodeSingleEdge) {
  const auto hg = build_hypergraph(1, {{0}});
  Matrix x(1, 2);
  x << 1, 2;
  for (double slope : {0.0, 0.25, 3.0}) {
    HgnnParams p = identity_params(2);
    p.layers[0].slope_e = p.layers[0].slope_v = slope;
    const auto out = hgnn_forward(hg.incidence(), x, {}, p);
    EXPECT_EQ(out.z_e, x);
    EXPECT_EQ(out.z_v, x);
  }
}

TEST(HgnnForward, TwoNodeMean) {
  const auto hg = build_hypergraph(2, {{0, 1}});
  Matrix x(2, 2);
  x << 1, -3, 2, 0.5;
  const HgnnParams p = identity_params(2);
  const auto out = hgnn_forward(hg.incidence(), x, {}, p);
  const RowVector mean = (x.row(0) + x.row(1)) / 2.0;
  EXPECT_DOUBLE_EQ(out.z_e(0, 0), test::prelu_ref(mean[0], 0.25));
  EXPECT_DOUBLE_EQ(out.z_e(0, 1), test::prelu_ref(mean[1], 0.25));
}

TEST(HgnnForward, MatchesDenseOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto edges = test::random_edge_lists(12, 9, 1, 5, rng);
    std::vector<double> w(edges.size());
    for (double& v : w) v = 0.5 + rng.uniform01();
    const auto hg = build_hypergraph(12, edges, w);
    const HgnnDims dims{5, 4, 3, 1 + seed % 2};
    const HgnnParams p = random_params(dims, seed + 100);
    const Matrix x = test::random_matrix(12, 5, rng);
    const Matrix h = test::dense_incidence(hg.incidence());
    const auto out = hgnn_forward(hg.incidence(), x, w, p);
    const auto ref = test::dense_hgnn(h, x, w, p);
    EXPECT_LE(max_abs_diff(out.z_v, ref.z_v), 1e-10);
    EXPECT_LE(max_abs_diff(out.z_e, ref.z_e), 1e-10);
  }
}

TEST(HgnnForward, Errors) {
  const auto hg = build_hypergraph(2, {{0, 1}});
  const HgnnParams p = identity_params(2);
  EXPECT_TAHG_ERROR(hgnn_forward(hg.incidence(), Matrix::Ones(2, 3), {}, p), ErrorCode::DimensionMismatch);
  EXPECT_TAHG_ERROR(hgnn_forward(hg.incidence(), Matrix::Ones(3, 2), {}, p), ErrorCode::DimensionMismatch);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_TAHG_ERROR(hgnn_forward(hg.incidence(), bad, {}, p), ErrorCode::NonFiniteInput);
}

TEST(HgnnForward, EmptyColumnIsSafe) {
  Rng rng(2);
  const auto hg = build_hypergraph(5, {{0, 1, 2}, {2, 3}, {3, 4}});
  // Drop both members of the second hyperedge and node 4's only incidence.
  const std::vector<std::uint8_t> keep{1, 1, 1, 0, 0, 1, 0};
  const Incidence masked = hg.incidence().masked(keep);
  ASSERT_EQ(masked.edge_size(1), 0u);
  const HgnnParams p = random_params({3, 4, 2, 1}, 9);
  const Matrix x = test::random_matrix(5, 3, rng);
  const auto out = hgnn_forward(masked, x, {}, p);
  EXPECT_TRUE(out.z_v.allFinite());
  EXPECT_TRUE(out.z_e.allFinite());
  const auto ref = test::dense_hgnn(test::dense_incidence(masked), x, {}, p);
  EXPECT_LE(max_abs_diff(out.z_v, ref.z_v), 1e-12);
  // The emptied hyperedge sees a zero message, so only its bias remains.
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(out.z_e(1, j), test::prelu_ref(p.layers[0].b_e[j], p.layers[0].slope_e));
  }
}

TEST(HgnnForward, PermutationEquivariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const std::size_t n = 10;
    const auto edges = test::random_edge_lists(n, 7, 1, 4, rng);
    const Matrix x = test::random_matrix(static_cast<Eigen::Index>(n), 4, rng);
    const HgnnParams p = random_params({4, 3, 3, 1}, seed);
    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<std::size_t> edge_perm(edges.size());
    std::iota(edge_perm.begin(), edge_perm.end(), 0);
    rng.shuffle(edge_perm);
    // Node v becomes perm[v]; hyperedge edge_perm[j] moves to position j.
    std::vector<std::vector<NodeId>> moved;
    for (std::size_t j : edge_perm) {
      std::vector<NodeId> e;
      for (NodeId v : edges[j]) e.push_back(perm[v]);
      moved.push_back(e);
    }
    Matrix xp(x.rows(), x.cols());
    for (NodeId v = 0; v < n; ++v) xp.row(perm[v]) = x.row(v);
    const auto a = hgnn_forward(build_hypergraph(n, edges).incidence(), x, {}, p);
    const auto b = hgnn_forward(build_hypergraph(n, moved).incidence(), xp, {}, p);
    for (NodeId v = 0; v < n; ++v) EXPECT_LE((a.z_v.row(v) - b.z_v.row(perm[v])).cwiseAbs().maxCoeff(), 1e-12);
    for (std::size_t j = 0; j < edge_perm.size(); ++j) {
      EXPECT_LE((a.z_e.row(static_cast<Eigen::Index>(edge_perm[j])) - b.z_e.row(static_cast<Eigen::Index>(j)))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

TEST(HgnnForward, Deterministic) {
  Rng rng(1);
  const auto hg = test::random_hypergraph(15, 8, 1, 4, rng);
  const Matrix x = test::random_matrix(15, 4, rng);
  const HgnnParams p = random_params({4, 4, 4, 1}, 3);
  EXPECT_EQ(hgnn_forward(hg.incidence(), x, {}, p).z_v, hgnn_forward(hg.incidence(), x, {}, p).z_v);
}

TEST(HgnnBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(4);
  const auto hg = test::random_hypergraph(8, 5, 1, 4, rng);
  const Matrix x = test::random_matrix(8, 3, rng);
  const HgnnParams p = random_params({3, 4, 2, 2}, 5);
  const auto out = hgnn_forward(hg.incidence(), x, {}, p);
  const Matrix gz = Matrix::Zero(8, 2);
  const Matrix ge = Matrix::Zero(5, 4);
  const auto g = hgnn_backward(out, p, gz, &ge);
  for (double v : test::param_values(g.params)) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(g.features, Matrix::Zero(8, 3));
}

TEST(HgnnBackward, LinearCaseClosedForm) {
  Rng rng(6);
  const auto hg = test::random_connected_hypergraph(9, 4, 4, rng);
  const Matrix h = test::dense_incidence(hg.incidence());
  const Matrix x = test::random_matrix(9, 3, rng).cwiseAbs();
  HgnnParams p = random_params({3, 4, 2, 1}, 7);
  auto& l = p.layers[0];
  // Positive inputs, weights and biases keep every pre-activation positive.
  l.theta_e = l.theta_e.cwiseAbs();
  l.theta_v = l.theta_v.cwiseAbs();
  l.b_e = l.b_e.cwiseAbs();
  l.b_v = l.b_v.cwiseAbs();
  const auto out = hgnn_forward(hg.incidence(), x, {}, p);
  ASSERT_GT(out.cache[0].pre_e.minCoeff(), 0.0);
  ASSERT_GT(out.cache[0].pre_v.minCoeff(), 0.0);

  Matrix b = h.transpose();
  for (Eigen::Index j = 0; j < b.rows(); ++j) b.row(j) /= h.col(j).sum();
  Matrix a = h;
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) /= h.row(i).sum();
  const Matrix g = test::random_matrix(9, 2, rng);
  const Matrix z_e = b * x * l.theta_e + Matrix::Ones(b.rows(), 1) * l.b_e;
  const Matrix d_ze = a.transpose() * g * l.theta_v.transpose();

  const auto grads = hgnn_backward(out, p, g, nullptr);
  const auto& gl = grads.params.layers[0];
  EXPECT_LE(max_abs_diff(gl.theta_v, (a * z_e).transpose() * g), 1e-12);
  EXPECT_LE(max_abs_diff(gl.b_v, g.colwise().sum()), 1e-12);
  EXPECT_LE(max_abs_diff(gl.theta_e, (b * x).transpose() * d_ze), 1e-12);
  EXPECT_LE(max_abs_diff(gl.b_e, d_ze.colwise().sum()), 1e-12);
  EXPECT_LE(max_abs_diff(grads.features, b.transpose() * d_ze * l.theta_e.transpose()), 1e-12);
  EXPECT_EQ(gl.slope_e, 0.0);
  EXPECT_EQ(gl.slope_v, 0.0);
}

TEST(HgnnBackward, FiniteDifferencesTenNodes) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto edges = test::random_edge_lists(10, 6, 1, 4, rng);
    std::vector<double> w(edges.size());
    for (double& v : w) v = 0.5 + rng.uniform01();
    const auto hg = build_hypergraph(10, edges, w);
    Matrix x = test::random_matrix(10, 4, rng);
    HgnnParams p = random_params({4, 5, 3, 1 + seed % 2}, seed + 50);
    const Matrix c = test::random_matrix(10, 3, rng);
    const Matrix d = test::random_matrix(static_cast<Eigen::Index>(edges.size()), 5, rng);
    // L = <C, Z_V> + <D, Z_E>
    auto loss = [&] {
      const auto out = hgnn_forward(hg.incidence(), x, w, p, false);
      return (c.array() * out.z_v.array()).sum() + (d.array() * out.z_e.array()).sum();
    };
    const auto out = hgnn_forward(hg.incidence(), x, w, p);
    const auto g = hgnn_backward(out, p, c, &d);
    EXPECT_LE(test::fd_worst_relative_error(test::param_pointers(p), test::param_values(g.params), loss), 1e-4)
        << "seed " << seed;
    std::vector<double*> xs;
    std::vector<double> gx;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        xs.push_back(&x(i, j));
        gx.push_back(g.features(i, j));
      }
    }
    EXPECT_LE(test::fd_worst_relative_error(xs, gx, loss), 1e-4) << "seed " << seed;
  }
}

TEST(HgnnBackward, MissingCache) {
  const auto hg = build_hypergraph(2, {{0, 1}});
  const HgnnParams p = identity_params(2);
  const auto out = hgnn_forward(hg.incidence(), Matrix::Ones(2, 2), {}, p, false);
  EXPECT_TAHG_ERROR(hgnn_backward(out, p, Matrix::Ones(2, 2), nullptr), ErrorCode::MissingForwardCache);
}

AugmentedView full_view(const Hypergraph& hg, const Matrix& x) {
  return AugmentedView{x, hg.incidence(), std::vector<std::uint8_t>(hg.nnz(), 1)};
}

TEST(SubgraphForward, WholeGraphIsMeanOfFullForward) {
  Rng rng(3);
  const auto hg = test::random_connected_hypergraph(11, 5, 4, rng);
  const Matrix x = test::random_matrix(11, 4, rng);
  const HgnnParams p = random_params({4, 3, 3, 1}, 2);
  SubgraphSample sub;
  sub.hyperedges.resize(hg.num_edges());
  std::iota(sub.hyperedges.begin(), sub.hyperedges.end(), 0);
  sub.nodes.resize(hg.num_nodes());
  std::iota(sub.nodes.begin(), sub.nodes.end(), 0);
  const RowVector z = subgraph_forward(full_view(hg, x), sub, p);
  const RowVector expect = hgnn_forward(hg.incidence(), x, {}, p).z_v.colwise().mean();
  EXPECT_LE((z - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SubgraphForward, ConstantFeaturesCollapse) {
  const auto hg = build_hypergraph(6, {{1, 3, 4}, {0, 5}});
  Matrix x = Matrix::Zero(6, 3);
  const RowVector c = (RowVector(3) << 0.7, -1.2, 0.4).finished();
  for (NodeId v : {1, 3, 4}) x.row(v) = c;
  const HgnnParams p = random_params({3, 4, 2, 1}, 8);
  const auto& l = p.layers[0];
  RowVector z_e = c * l.theta_e + l.b_e;
  for (auto& t : z_e) t = test::prelu_ref(t, l.slope_e);
  RowVector z_v = z_e * l.theta_v + l.b_v;
  for (auto& t : z_v) t = test::prelu_ref(t, l.slope_v);
  const SubgraphSample sub{1, {0}, {1, 3, 4}};
  EXPECT_LE((subgraph_forward(full_view(hg, x), sub, p) - z_v).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SubgraphForward, WalkExampleMatchesDenseOracle) {
  // Hyperedges e1..e5 as in the s-adjacency walk example; the subgraph visits e1, e3, e4, e5.
  const auto hg = build_hypergraph(10, {{0, 1, 2}, {2, 3}, {1, 2, 4}, {2, 4, 5, 6}, {5, 6, 7}});
  Rng rng(12);
  const Matrix x = test::random_matrix(10, 4, rng);
  const HgnnParams p = random_params({4, 5, 3, 1}, 4);
  const SubgraphSample sub{2, {0, 2, 3, 4}, {0, 1, 2, 4, 5, 6, 7}};
  // Mask out one incidence so the restriction is taken on the masked view.
  AugmentedView view = full_view(hg, x);
  view.mask[hg.incidence().column_offset(3)] = 0;  // node 2 leaves e4
  view.incidence = hg.incidence().masked(view.mask);

  const Matrix h = test::dense_incidence(view.incidence);
  Matrix sub_h(static_cast<Eigen::Index>(sub.nodes.size()), static_cast<Eigen::Index>(sub.hyperedges.size()));
  Matrix sub_x(static_cast<Eigen::Index>(sub.nodes.size()), x.cols());
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) {
    sub_x.row(static_cast<Eigen::Index>(i)) = x.row(sub.nodes[i]);
    for (std::size_t j = 0; j < sub.hyperedges.size(); ++j) {
      sub_h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h(sub.nodes[i], sub.hyperedges[j]);
    }
  }
  const RowVector expect = test::dense_hgnn(sub_h, sub_x, {}, p).z_v.colwise().mean();
  EXPECT_LE((subgraph_forward(view, sub, p) - expect).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SubgraphForward, Empty) {
  const auto hg = build_hypergraph(2, {{0, 1}});
  const HgnnParams p = identity_params(2);
  EXPECT_TAHG_ERROR(subgraph_forward(full_view(hg, Matrix::Ones(2, 2)), SubgraphSample{}, p),
                    ErrorCode::EmptySubgraph);
}

TEST(SubgraphBackward, FiniteDifferences) {
  const auto hg = build_hypergraph(8, {{0, 1, 2}, {2, 3, 4}, {4, 5}, {5, 6, 7}, {1, 7}});
  Rng rng(5);
  const Matrix x = test::random_matrix(8, 3, rng);
  HgnnParams p = random_params({3, 4, 3, 1}, 6);
  const SubgraphSample sub{2, {0, 1, 2}, {0, 1, 2, 3, 4, 5}};
  const AugmentedView view = full_view(hg, x);
  const RowVector c = test::random_matrix(1, 3, rng).row(0);
  auto loss = [&] { return subgraph_forward(view, sub, p).dot(c); };
  HgnnParams grads = p.zeros_like();
  subgraph_backward(subgraph_encode(view, sub, p), p, c, grads);
  EXPECT_LE(test::fd_worst_relative_error(test::param_pointers(p), test::param_values(grads), loss), 1e-4);
}

TEST(HgnnParams, InitRangesAndShapes) {
  Rng rng(0);
  const HgnnDims dims{16, 8, 4, 2};
  const HgnnParams p = HgnnParams::init(dims, rng);
  ASSERT_EQ(p.layers.size(), 2u);
  EXPECT_EQ(p.layers[0].theta_e.rows(), 16);
  // Every layer maps into d_out; later layers read d_out.
  EXPECT_EQ(p.layers[0].theta_v.cols(), 4);
  EXPECT_EQ(p.layers[1].theta_e.rows(), 4);
  EXPECT_EQ(p.layers[1].theta_v.cols(), 4);
  EXPECT_LE(p.layers[0].theta_e.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_LE(p.layers[1].theta_v.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(8.0));
  EXPECT_EQ(p.layers[0].slope_e, 0.25);
  EXPECT_EQ(p.layers[1].slope_v, 0.25);
  EXPECT_EQ(p.dims().d_in, 16u);
  EXPECT_EQ(p.dims().d_out, 4u);
  EXPECT_EQ(p.num_parameters(), test::param_values(p).size());
}

TEST(HgnnParams, CheckpointRoundTrip) {
  const HgnnParams p = random_params({5, 4, 3, 2}, 11);
  std::stringstream ss;
  p.write(ss);
  EXPECT_EQ(ss.str().substr(0, 8), "HITECHG1");
  const HgnnParams back = HgnnParams::read(ss);
  EXPECT_EQ(test::param_values(back), test::param_values(p));
  std::stringstream bad("HITECHGX");
  EXPECT_THROW(HgnnParams::read(bad), Error);
}

}  // namespace
}  // namespace tahg
