#include "tahg/stage1.hpp"

#include <cmath>
#include <string>

#include "tahg/error.hpp"
#include "tahg/optim.hpp"
#include "tahg/rng.hpp"

namespace tahg {
namespace {

using NeighborLists = std::vector<std::vector<NodeId>>;

NeighborLists all_neighbors(const Hypergraph& hg) {
  NeighborLists out(hg.num_nodes());
  for (NodeId v = 0; v < hg.num_nodes(); ++v) out[v] = one_hop_neighbors(hg, v);
  return out;
}

PoolSet pools_from(const NeighborLists& nbrs, const Matrix& x, bool strict) {
  const auto n = x.rows();
  PoolSet out;
  out.positive = Matrix::Zero(n, x.cols());
  out.negative = Matrix::Zero(n, x.cols());
  out.eligible.assign(static_cast<std::size_t>(n), 0);
  const RowVector total = x.colwise().sum();
  for (Eigen::Index v = 0; v < n; ++v) {
    const auto& nb = nbrs[static_cast<std::size_t>(v)];
    RowVector nsum = RowVector::Zero(x.cols());
    for (NodeId u : nb) nsum += x.row(u);
    const auto neg_count = static_cast<Eigen::Index>(n) - static_cast<Eigen::Index>(nb.size()) - (strict ? 0 : 1);
    if (!nb.empty()) out.positive.row(v) = nsum / static_cast<double>(nb.size());
    if (neg_count > 0) {
      RowVector rest = total - nsum;
      if (!strict) rest -= x.row(v);
      out.negative.row(v) = rest / static_cast<double>(neg_count);
    }
    out.eligible[static_cast<std::size_t>(v)] = !nb.empty() && neg_count > 0;
  }
  return out;
}

double cosine(const RowVector& a, const RowVector& b) { return a.dot(b) / (a.norm() * b.norm()); }

// d cos(a,b) / d a
RowVector cosine_grad(const RowVector& a, const RowVector& b, double cos_ab) {
  const double na = a.norm();
  const double nb = b.norm();
  return b / (na * nb) - cos_ab * a / (na * na);
}

bool nonzero(const RowVector& x) { return x.squaredNorm() > 0.0; }

Stage1Objective objective_impl(const TextEncoder& enc, const NeighborLists& nbrs, const std::vector<SparseBag>& bags,
                               std::span<const NodeId> anchors, double margin, bool strict, const PoolSet* fixed,
                               bool want_gradient) {
  const auto d = static_cast<Eigen::Index>(enc.dim());
  const auto n = static_cast<Eigen::Index>(bags.size());
  Stage1Objective out;

  Matrix x;
  PoolSet live;
  const PoolSet* pools = fixed;
  if (!fixed) {
    x = enc.embed_bags(bags);
    live = pools_from(nbrs, x, strict);
    pools = &live;
  }

  // Gradient w.r.t. node embeddings; `spread` is added to every row at the end
  // and carries the negative-pool contributions that reach all nodes.
  Matrix d_x;
  RowVector spread;
  if (want_gradient) {
    if (!fixed) d_x = Matrix::Zero(n, d);
    spread = RowVector::Zero(d);
  }

  struct Term {
    NodeId v;
    TripletGradient g;
  };
  std::vector<Term> terms;
  for (NodeId v : anchors) {
    if (!pools->eligible[v]) continue;
    TripletBatch b;
    b.anchor = fixed ? enc.embed_bag(bags[v]) : RowVector(x.row(v));
    b.positive = pools->positive.row(v);
    b.negative = pools->negative.row(v);
    b.margin = margin;
    if (!nonzero(b.anchor) || !nonzero(b.positive) || !nonzero(b.negative)) continue;
    if (want_gradient) {
      terms.push_back({v, triplet_loss_gradient(b)});
      out.loss += terms.back().g.loss;
    } else {
      out.loss += triplet_loss(b);
    }
    ++out.counted;
  }
  if (out.counted == 0) return out;
  const double scale = 1.0 / static_cast<double>(out.counted);
  out.loss *= scale;
  if (!want_gradient) return out;

  out.d_projection = Matrix::Zero(static_cast<Eigen::Index>(enc.config().feature_dim), d);
  out.d_bias = RowVector::Zero(d);
  auto scatter = [&](NodeId v, const RowVector& g) {
    const auto& bag = bags[v];
    for (std::size_t k = 0; k < bag.index.size(); ++k) out.d_projection.row(bag.index[k]) += bag.value[k] * g;
    out.d_bias += g;
  };

  for (const auto& t : terms) {
    if (t.g.loss <= 0.0) continue;
    const NodeId v = t.v;
    if (fixed) {
      scatter(v, scale * t.g.d_anchor);
      continue;
    }
    d_x.row(v) += scale * t.g.d_anchor;
    const auto& nb = nbrs[v];
    const RowVector gp = scale * t.g.d_positive / static_cast<double>(nb.size());
    const auto neg_count = n - static_cast<Eigen::Index>(nb.size()) - (strict ? 0 : 1);
    const RowVector gn = scale * t.g.d_negative / static_cast<double>(neg_count);
    spread += gn;
    for (NodeId u : nb) d_x.row(u) += gp - gn;
    if (!strict) d_x.row(v) -= gn;
  }
  if (!fixed) {
    for (Eigen::Index v = 0; v < n; ++v) {
      d_x.row(v) += spread;
      scatter(static_cast<NodeId>(v), d_x.row(v));
    }
  }
  return out;
}

}  // namespace

Pools positive_negative_pools(const Hypergraph& hg, const Matrix& embeddings, NodeId v, bool strict_negative_pool) {
  const auto nb = one_hop_neighbors(hg, v);
  if (nb.empty()) fail(ErrorCode::NoPositivePool, "node " + std::to_string(v) + " has no 1-hop neighbors");
  const auto n = embeddings.rows();
  const auto neg_count = n - static_cast<Eigen::Index>(nb.size()) - (strict_negative_pool ? 0 : 1);
  if (neg_count <= 0) fail(ErrorCode::NoNegativePool, "node " + std::to_string(v) + " is adjacent to every node");
  RowVector total = embeddings.colwise().sum();
  RowVector nsum = RowVector::Zero(embeddings.cols());
  for (NodeId u : nb) nsum += embeddings.row(u);
  RowVector rest = total - nsum;
  if (!strict_negative_pool) rest -= embeddings.row(v);
  return {nsum / static_cast<double>(nb.size()), rest / static_cast<double>(neg_count)};
}

PoolSet compute_pools(const Hypergraph& hg, const Matrix& embeddings, bool strict_negative_pool) {
  return pools_from(all_neighbors(hg), embeddings, strict_negative_pool);
}

double triplet_loss(const TripletBatch& b) {
  if (!nonzero(b.anchor) || !nonzero(b.positive) || !nonzero(b.negative)) {
    fail(ErrorCode::ZeroVector, "cosine similarity undefined for a zero vector");
  }
  return std::max(0.0, cosine(b.anchor, b.negative) - cosine(b.anchor, b.positive) + b.margin);
}

TripletGradient triplet_loss_gradient(const TripletBatch& b) {
  TripletGradient g;
  g.loss = triplet_loss(b);
  const auto d = b.anchor.size();
  g.d_anchor = RowVector::Zero(d);
  g.d_positive = RowVector::Zero(d);
  g.d_negative = RowVector::Zero(d);
  if (g.loss <= 0.0) return g;
  const double cp = cosine(b.anchor, b.positive);
  const double cn = cosine(b.anchor, b.negative);
  g.d_anchor = cosine_grad(b.anchor, b.negative, cn) - cosine_grad(b.anchor, b.positive, cp);
  g.d_positive = -cosine_grad(b.positive, b.anchor, cp);
  g.d_negative = cosine_grad(b.negative, b.anchor, cn);
  return g;
}

Stage1Objective stage1_objective(const TextEncoder& enc, const Hypergraph& hg, const std::vector<SparseBag>& bags,
                                 std::span<const NodeId> anchors, double margin, bool strict_negative_pool,
                                 const PoolSet* pools_fixed, bool want_gradient) {
  if (bags.size() != hg.num_nodes()) fail(ErrorCode::DimensionMismatch, "one bag per node required");
  return objective_impl(enc, all_neighbors(hg), bags, anchors, margin, strict_negative_pool, pools_fixed,
                        want_gradient);
}

double stage1_loss(const TextEncoder& enc, const Hypergraph& hg, const std::vector<SparseBag>& bags, double margin,
                   bool strict_negative_pool) {
  std::vector<NodeId> all(hg.num_nodes());
  for (NodeId v = 0; v < all.size(); ++v) all[v] = v;
  return stage1_objective(enc, hg, bags, all, margin, strict_negative_pool, nullptr, false).loss;
}

Stage1Result pretrain_text_encoder(TextEncoder enc, const Hypergraph& hg, const TextCorpus& corpus,
                                   const Stage1Config& cfg) {
  if (corpus.size() != hg.num_nodes()) fail(ErrorCode::DimensionMismatch, "corpus and hypergraph sizes differ");
  std::vector<SparseBag> bags;
  bags.reserve(corpus.size());
  for (const auto& t : corpus.texts) bags.push_back(enc.bag(t));
  const auto nbrs = all_neighbors(hg);

  std::vector<NodeId> all(hg.num_nodes());
  for (NodeId v = 0; v < all.size(); ++v) all[v] = v;

  Stage1Result result{enc, {}, 0.0};
  {
    const Matrix x = enc.embed_bags(bags);
    const PoolSet pools = pools_from(nbrs, x, cfg.strict_negative_pool);
    bool any = false;
    for (auto e : pools.eligible) any = any || e;
    if (!any) fail(ErrorCode::NoEligibleNodes, "no node has both a positive and a negative pool");
  }

  Adam adam(AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, 0.0});
  Rng rng(cfg.seed);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Matrix x = enc.embed_bags(bags);
    const PoolSet pools = pools_from(nbrs, x, cfg.strict_negative_pool);
    const auto epoch_obj = objective_impl(enc, nbrs, bags, all, cfg.margin, cfg.strict_negative_pool, &pools, false);
    if (!std::isfinite(epoch_obj.loss)) fail(ErrorCode::NonFiniteLoss, "stage-1 loss is not finite");
    result.loss_trace.push_back(epoch_obj.loss);

    std::vector<NodeId> order;
    for (NodeId v : all) {
      if (pools.eligible[v]) order.push_back(v);
    }
    rng.shuffle(order);
    const std::size_t batch_size = cfg.batch_size ? cfg.batch_size : order.size();
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      std::span<const NodeId> batch(order.data() + start, stop - start);
      auto obj = objective_impl(enc, nbrs, bags, batch, cfg.margin, cfg.strict_negative_pool,
                                cfg.refresh_per_step ? nullptr : &pools, true);
      if (obj.counted == 0) continue;
      adam.begin_step();
      adam.apply(0, enc.projection().data(), obj.d_projection.data(),
                 static_cast<std::size_t>(enc.projection().size()));
      adam.apply(1, enc.bias().data(), obj.d_bias.data(), static_cast<std::size_t>(enc.bias().size()));
    }
  }
  result.final_loss = objective_impl(enc, nbrs, bags, all, cfg.margin, cfg.strict_negative_pool, nullptr, false).loss;
  result.encoder = std::move(enc);
  return result;
}

}  // namespace tahg
