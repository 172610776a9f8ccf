#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tahg/corpus.hpp"
#include "tahg/hypergraph.hpp"
#include "tahg/text_encoder.hpp"
#include "tahg/types.hpp"

namespace tahg {

// Mean-pooled positive (1-hop neighbors) and negative (everything else)
// contexts of one node.
struct Pools {
  RowVector positive;
  RowVector negative;
};

// By default the negative set is V \ ({v} ∪ N(v)); strict_negative_pool keeps
// the anchor in it, i.e. V \ N(v). Throws NoPositivePool / NoNegativePool.
Pools positive_negative_pools(const Hypergraph& hg, const Matrix& embeddings, NodeId v,
                              bool strict_negative_pool = false);

// Pools for every node at once: the negative mean is the global sum minus the
// anchor and neighbor sums. eligible[v] is 0 when either pool is empty.
struct PoolSet {
  Matrix positive;
  Matrix negative;
  std::vector<std::uint8_t> eligible;
};
PoolSet compute_pools(const Hypergraph& hg, const Matrix& embeddings, bool strict_negative_pool = false);

struct TripletBatch {
  RowVector anchor;
  RowVector positive;
  RowVector negative;
  double margin = 0.5;
};

// max{0, cos(x, x⁻) − cos(x, x⁺) + m}. Throws ZeroVector.
double triplet_loss(const TripletBatch& b);

struct TripletGradient {
  double loss = 0.0;
  RowVector d_anchor;
  RowVector d_positive;
  RowVector d_negative;
};
TripletGradient triplet_loss_gradient(const TripletBatch& b);

struct Stage1Config {
  std::size_t epochs = 5;
  double lr = 1e-3;
  double margin = 0.5;
  std::size_t batch_size = 0;  // anchors per optimizer step; 0 = all (full batch)
  bool refresh_per_step = false;
  bool strict_negative_pool = false;
  std::uint64_t seed = 0;
};

// Stage-1 loss over the given anchors, differentiated through the anchor
// embeddings and, when pools_fixed is null, through both pools as well.
// Nodes without both pools (or with a zero vector) are skipped.
struct Stage1Objective {
  double loss = 0.0;
  std::size_t counted = 0;
  Matrix d_projection;
  RowVector d_bias;
};
Stage1Objective stage1_objective(const TextEncoder& enc, const Hypergraph& hg, const std::vector<SparseBag>& bags,
                                 std::span<const NodeId> anchors, double margin, bool strict_negative_pool,
                                 const PoolSet* pools_fixed = nullptr, bool want_gradient = true);

// Mean triplet loss over all eligible nodes at the current parameters.
double stage1_loss(const TextEncoder& enc, const Hypergraph& hg, const std::vector<SparseBag>& bags, double margin,
                   bool strict_negative_pool = false);

struct Stage1Result {
  TextEncoder encoder;
  std::vector<double> loss_trace;  // loss at the start of each epoch
  double final_loss = 0.0;
};

// Adam on the projection and bias. Pools are snapshotted at the start of each
// epoch (stop-gradient) unless refresh_per_step, in which case every step
// recomputes embeddings and differentiates through the pools.
// Throws NoEligibleNodes.
Stage1Result pretrain_text_encoder(TextEncoder enc, const Hypergraph& hg, const TextCorpus& corpus,
                                   const Stage1Config& cfg);

}  // namespace tahg
