#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "tahg/augment.hpp"
#include "tahg/hypergraph.hpp"
#include "tahg/rng.hpp"
#include "tahg/subgraph.hpp"
#include "tahg/types.hpp"

namespace tahg {

struct HgnnDims {
  std::size_t d_in = 64;
  std::size_t d_hidden = 64;
  std::size_t d_out = 64;
  std::size_t layers = 1;
};

// One node -> hyperedge -> node round:
//   Z_E = ρ_e(D_e⁻¹ Hᵀ Z_in Θ_E + b_e)
//   Z_V = ρ_v(D_v⁻¹ H W Z_E Θ_V + b_v)
// where ρ is PReLU with a learnable scalar slope.
struct HgnnLayer {
  Matrix theta_e;
  RowVector b_e;
  Matrix theta_v;
  RowVector b_v;
  double slope_e = 0.25;
  double slope_v = 0.25;
};

struct HgnnParams {
  std::vector<HgnnLayer> layers;

  // Θ and b uniform(−1/√fan_in, 1/√fan_in); slopes 0.25.
  static HgnnParams init(const HgnnDims& dims, Rng& rng);
  HgnnParams zeros_like() const;
  HgnnDims dims() const;

  // Visits every parameter block as (slot, data, size) in checkpoint order.
  void for_each_block(const std::function<void(std::size_t, double*, std::size_t)>& fn);
  void for_each_block(const std::function<void(std::size_t, const double*, std::size_t)>& fn) const;
  std::size_t num_parameters() const;

  // Axpy over all blocks: this += alpha * other.
  void add_scaled(const HgnnParams& other, double alpha);
  bool all_finite() const;

  // "HITECHG1", u64 layers, u64 d_in, u64 d_hidden, u64 d_out, then per layer
  // Θ_E, b_e, Θ_V, b_v (row-major f64), slope_e, slope_v (f64).
  void write(std::ostream& out) const;
  static HgnnParams read(std::istream& in);
};

struct LayerCache {
  Matrix input;     // Z_V of the previous layer (features for layer 0)
  Matrix msg_e;     // D_e⁻¹ Hᵀ input
  Matrix pre_e;     // msg_e Θ_E + b_e
  Matrix z_e;
  Matrix msg_v;     // D_v⁻¹ H W z_e
  Matrix pre_v;
};

struct EncodeOutput {
  Matrix z_v;
  Matrix z_e;  // last layer's hyperedge embeddings
  std::vector<LayerCache> cache;
  Incidence incidence;
  std::vector<double> weights;
  std::vector<double> inv_edge_degree;  // 0 for empty columns
  std::vector<double> inv_node_degree;  // 0 for nodes without incidences
};

// weights may be empty (identity W). Throws DimensionMismatch, NonFiniteInput.
EncodeOutput hgnn_forward(const Incidence& incidence, const Matrix& features, std::span<const double> weights,
                          const HgnnParams& params, bool keep_cache = true);
EncodeOutput hgnn_forward(const AugmentedView& view, const HgnnParams& params, std::span<const double> weights = {});

struct HgnnGradients {
  HgnnParams params;
  Matrix features;  // empty unless requested
};

// grad_ze may be null (no upstream signal on Z_E). Throws MissingForwardCache.
HgnnGradients hgnn_backward(const EncodeOutput& out, const HgnnParams& params, const Matrix& grad_zv,
                            const Matrix* grad_ze, bool want_feature_grad = true);

// Restriction of a view to one sampled subgraph, encoded on its own with
// degrees recomputed on the restriction.
struct SubgraphEncoding {
  RowVector z;  // mean of the subgraph's node embeddings
  EncodeOutput out;
};

// Throws EmptySubgraph.
SubgraphEncoding subgraph_encode(const AugmentedView& view, const SubgraphSample& sub, const HgnnParams& params,
                                 std::span<const double> weights = {});
RowVector subgraph_forward(const AugmentedView& view, const SubgraphSample& sub, const HgnnParams& params,
                           std::span<const double> weights = {});
// Accumulates d z / d params · grad_z into grads.
void subgraph_backward(const SubgraphEncoding& enc, const HgnnParams& params, const RowVector& grad_z,
                       HgnnParams& grads);

}  // namespace tahg
