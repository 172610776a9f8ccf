#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tahg/augment.hpp"
#include "tahg/hgnn.hpp"
#include "tahg/hypergraph.hpp"
#include "tahg/rng.hpp"
#include "tahg/subgraph.hpp"
#include "tahg/types.hpp"

namespace tahg {

struct InfoNceConfig {
  double tau_n = 0.5;
  double tau_e = 0.5;
  double tau_s = 0.5;

  void validate() const;  // NonPositiveTemperature
};

struct LossWeights {
  double lambda_e = 1.0;
  double lambda_s = 1.0;

  void validate() const;  // InvalidConfig
};

// Mean over rows i of −log softmax_k(cos(a_i, c_k) / τ)[i]. Rows pair up by
// index; every other candidate row is a negative.
// Throws ZeroRow, NonPositiveTemperature, DimensionMismatch.
double info_nce(const Matrix& anchors, const Matrix& candidates, double tau);

struct InfoNceGradient {
  double loss = 0.0;
  Matrix d_anchors;
  Matrix d_candidates;
};
InfoNceGradient info_nce_gradient(const Matrix& anchors, const Matrix& candidates, double tau);

// ½ (info_nce(z1, z2) + info_nce(z2, z1)), with gradients for both inputs.
struct SymmetricLoss {
  double loss = 0.0;
  Matrix d_first;
  Matrix d_second;
};
SymmetricLoss symmetric_info_nce(const Matrix& z1, const Matrix& z2, double tau);

double node_loss(const Matrix& z1_v, const Matrix& z2_v, double tau_n);
double hyperedge_loss(const Matrix& z1_e, const Matrix& z2_e, double tau_e);

// The ceil(r% · |V|) nodes of largest weighted degree, ordered by
// (−degree, id). Throws InvalidRatio unless 0 < r ≤ 100.
std::vector<NodeId> select_anchor_nodes(const Hypergraph& hg, double r_percent);

// adjacency[e] = hyperedges sharing at least s nodes with e (sorted).
using SAdjacency = std::vector<std::vector<EdgeId>>;
SAdjacency s_adjacency(const Hypergraph& hg, std::size_t s);

struct WalkConfig {
  std::size_t s = 2;
  std::size_t length = 4;     // l, maximum number of hyperedges
  bool sampled_nodes = false;  // one random member per visited hyperedge instead of the union
};

// Starts from a uniform hyperedge containing center and steps uniformly among
// unvisited s-adjacent hyperedges, stopping early at a dead end.
// Throws IsolatedCenter, InvalidS, InvalidConfig (l = 0).
SubgraphSample s_walk(const Hypergraph& hg, NodeId center, const WalkConfig& cfg, Rng& rng);
SubgraphSample s_walk(const Hypergraph& hg, const SAdjacency& adjacency, NodeId center, const WalkConfig& cfg,
                      Rng& rng);

// One walk per anchor, in anchor order.
std::vector<SubgraphSample> sample_subgraphs(const Hypergraph& hg, std::span<const NodeId> anchors,
                                             const WalkConfig& cfg, Rng& rng);

struct SubgraphLoss {
  double loss = 0.0;
  Matrix z1;  // one row per sample
  Matrix z2;
};

// Encodes every sample through both views and applies the symmetric InfoNCE
// with tau_s. When grads is non-null the parameter gradient of the loss is
// added into it. Throws EmptySubgraph.
SubgraphLoss subgraph_loss(const AugmentedView& view1, const AugmentedView& view2,
                           std::span<const SubgraphSample> samples, const HgnnParams& params, double tau_s,
                           std::span<const double> weights = {}, HgnnParams* grads = nullptr);

double total_loss(double l_n, double l_e, double l_s, const LossWeights& w);

}  // namespace tahg
