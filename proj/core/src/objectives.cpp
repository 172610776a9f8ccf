#include "tahg/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tahg/error.hpp"

namespace tahg {
namespace {

struct Normalized {
  Matrix unit;
  Vector norms;
};

Normalized normalize_rows(const Matrix& m, const char* what) {
  Normalized out{m, Vector(m.rows())};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (!(n > 0.0)) fail(ErrorCode::ZeroRow, std::string(what) + " row " + std::to_string(i) + " has zero norm");
    out.norms[i] = n;
    out.unit.row(i) /= n;
  }
  return out;
}

void check_inputs(const Matrix& a, const Matrix& c, double tau) {
  if (!(tau > 0.0)) fail(ErrorCode::NonPositiveTemperature, "temperature must be positive");
  if (a.rows() != c.rows() || a.cols() != c.cols()) {
    fail(ErrorCode::DimensionMismatch, "anchor and candidate matrices differ in shape");
  }
  if (a.rows() == 0) fail(ErrorCode::DimensionMismatch, "info_nce needs at least one row");
  if (!a.allFinite() || !c.allFinite()) fail(ErrorCode::NonFiniteInput, "info_nce input is not finite");
}

// Row-wise softmax of the logits plus the mean loss.
double softmax_loss(const Matrix& logits, Matrix* probs) {
  const auto n = logits.rows();
  double total = 0.0;
  if (probs) probs->resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) z += std::exp(logits(i, k) - mx);
    const double lse = mx + std::log(z);
    total += lse - logits(i, i);
    if (probs) {
      for (Eigen::Index k = 0; k < n; ++k) (*probs)(i, k) = std::exp(logits(i, k) - lse);
    }
  }
  return total / static_cast<double>(n);
}

// Back through x̂ = x / |x|.
Matrix unnormalize_grad(const Normalized& x, const Matrix& d_unit) {
  Matrix out(d_unit.rows(), d_unit.cols());
  for (Eigen::Index i = 0; i < d_unit.rows(); ++i) {
    const double proj = x.unit.row(i).dot(d_unit.row(i));
    out.row(i) = (d_unit.row(i) - proj * x.unit.row(i)) / x.norms[i];
  }
  return out;
}

}  // namespace

void InfoNceConfig::validate() const {
  if (!(tau_n > 0.0) || !(tau_e > 0.0) || !(tau_s > 0.0)) {
    fail(ErrorCode::NonPositiveTemperature, "tau_n, tau_e and tau_s must be positive");
  }
}

void LossWeights::validate() const {
  if (!std::isfinite(lambda_e) || !std::isfinite(lambda_s) || lambda_e < 0.0 || lambda_s < 0.0) {
    fail(ErrorCode::InvalidConfig, "lambda_e and lambda_s must be finite and nonnegative");
  }
}

double info_nce(const Matrix& anchors, const Matrix& candidates, double tau) {
  check_inputs(anchors, candidates, tau);
  const auto a = normalize_rows(anchors, "anchor");
  const auto c = normalize_rows(candidates, "candidate");
  const Matrix logits = (a.unit * c.unit.transpose()) / tau;
  return softmax_loss(logits, nullptr);
}

InfoNceGradient info_nce_gradient(const Matrix& anchors, const Matrix& candidates, double tau) {
  check_inputs(anchors, candidates, tau);
  const auto a = normalize_rows(anchors, "anchor");
  const auto c = normalize_rows(candidates, "candidate");
  const Matrix logits = (a.unit * c.unit.transpose()) / tau;
  Matrix probs;
  InfoNceGradient g;
  g.loss = softmax_loss(logits, &probs);
  const auto n = anchors.rows();
  // dL/dlogits = (P − I) / N; logits = Â Ĉᵀ / τ.
  Matrix d_logits = probs;
  d_logits.diagonal().array() -= 1.0;
  d_logits /= static_cast<double>(n) * tau;
  g.d_anchors = unnormalize_grad(a, d_logits * c.unit);
  g.d_candidates = unnormalize_grad(c, d_logits.transpose() * a.unit);
  return g;
}

SymmetricLoss symmetric_info_nce(const Matrix& z1, const Matrix& z2, double tau) {
  check_inputs(z1, z2, tau);
  const auto a = normalize_rows(z1, "first-view");
  const auto c = normalize_rows(z2, "second-view");
  const Matrix logits = (a.unit * c.unit.transpose()) / tau;
  const Matrix logits_t = logits.transpose();
  Matrix p_forward;
  Matrix p_backward;
  SymmetricLoss out;
  out.loss = 0.5 * (softmax_loss(logits, &p_forward) + softmax_loss(logits_t, &p_backward));
  // Both directions share one similarity matrix S; collect dL/dS from each.
  p_forward.diagonal().array() -= 1.0;
  p_backward.diagonal().array() -= 1.0;
  const Matrix d_logits = (p_forward + p_backward.transpose()) * (0.5 / (static_cast<double>(z1.rows()) * tau));
  out.d_first = unnormalize_grad(a, d_logits * c.unit);
  out.d_second = unnormalize_grad(c, d_logits.transpose() * a.unit);
  return out;
}

double node_loss(const Matrix& z1_v, const Matrix& z2_v, double tau_n) {
  return 0.5 * (info_nce(z1_v, z2_v, tau_n) + info_nce(z2_v, z1_v, tau_n));
}

double hyperedge_loss(const Matrix& z1_e, const Matrix& z2_e, double tau_e) {
  return 0.5 * (info_nce(z1_e, z2_e, tau_e) + info_nce(z2_e, z1_e, tau_e));
}

std::vector<NodeId> select_anchor_nodes(const Hypergraph& hg, double r_percent) {
  if (!(r_percent > 0.0) || r_percent > 100.0) {
    fail(ErrorCode::InvalidRatio, "anchor ratio must be in (0, 100], got " + std::to_string(r_percent));
  }
  const std::size_t n = hg.num_nodes();
  // The small slack keeps exact products such as 30% of 200 from rounding up.
  auto take = static_cast<std::size_t>(std::ceil(r_percent / 100.0 * static_cast<double>(n) - 1e-9));
  take = std::clamp<std::size_t>(take, n ? 1 : 0, n);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&hg](NodeId a, NodeId b) { return hg.node_degree(a) > hg.node_degree(b); });
  order.resize(take);
  return order;
}

SAdjacency s_adjacency(const Hypergraph& hg, std::size_t s) {
  SAdjacency out(hg.num_edges());
  for (EdgeId e = 0; e < hg.num_edges(); ++e) out[e] = s_adjacent_hyperedges(hg, e, s);
  return out;
}

SubgraphSample s_walk(const Hypergraph& hg, const SAdjacency& adjacency, NodeId center, const WalkConfig& cfg,
                      Rng& rng) {
  if (center >= hg.num_nodes()) fail(ErrorCode::NodeIdOutOfRange, "center " + std::to_string(center));
  if (cfg.s < 1) fail(ErrorCode::InvalidS, "s must be at least 1");
  if (cfg.length < 1) fail(ErrorCode::InvalidConfig, "walk length must be at least 1");
  if (adjacency.size() != hg.num_edges()) fail(ErrorCode::DimensionMismatch, "adjacency does not match hypergraph");
  const auto start = hg.edges_of(center);
  if (start.empty()) fail(ErrorCode::IsolatedCenter, "node " + std::to_string(center) + " is in no hyperedge");

  SubgraphSample out;
  out.center = center;
  out.hyperedges.push_back(start[rng.uniform_index(start.size())]);
  std::vector<EdgeId> options;
  while (out.hyperedges.size() < cfg.length) {
    options.clear();
    for (EdgeId e : adjacency[out.hyperedges.back()]) {
      if (std::find(out.hyperedges.begin(), out.hyperedges.end(), e) == out.hyperedges.end()) options.push_back(e);
    }
    if (options.empty()) break;
    out.hyperedges.push_back(options[rng.uniform_index(options.size())]);
  }

  for (EdgeId e : out.hyperedges) {
    const auto members = hg.members(e);
    if (cfg.sampled_nodes) {
      out.nodes.push_back(members[rng.uniform_index(members.size())]);
    } else {
      out.nodes.insert(out.nodes.end(), members.begin(), members.end());
    }
  }
  std::sort(out.nodes.begin(), out.nodes.end());
  out.nodes.erase(std::unique(out.nodes.begin(), out.nodes.end()), out.nodes.end());
  return out;
}

SubgraphSample s_walk(const Hypergraph& hg, NodeId center, const WalkConfig& cfg, Rng& rng) {
  if (cfg.s < 1) fail(ErrorCode::InvalidS, "s must be at least 1");
  return s_walk(hg, s_adjacency(hg, cfg.s), center, cfg, rng);
}

std::vector<SubgraphSample> sample_subgraphs(const Hypergraph& hg, std::span<const NodeId> anchors,
                                             const WalkConfig& cfg, Rng& rng) {
  if (cfg.s < 1) fail(ErrorCode::InvalidS, "s must be at least 1");
  const auto adjacency = s_adjacency(hg, cfg.s);
  std::vector<SubgraphSample> out;
  out.reserve(anchors.size());
  for (NodeId v : anchors) out.push_back(s_walk(hg, adjacency, v, cfg, rng));
  return out;
}

SubgraphLoss subgraph_loss(const AugmentedView& view1, const AugmentedView& view2,
                           std::span<const SubgraphSample> samples, const HgnnParams& params, double tau_s,
                           std::span<const double> weights, HgnnParams* grads) {
  if (samples.empty()) fail(ErrorCode::EmptySubgraph, "no subgraph samples");
  std::vector<SubgraphEncoding> enc1;
  std::vector<SubgraphEncoding> enc2;
  enc1.reserve(samples.size());
  enc2.reserve(samples.size());
  for (const auto& s : samples) {
    enc1.push_back(subgraph_encode(view1, s, params, weights));
    enc2.push_back(subgraph_encode(view2, s, params, weights));
  }
  SubgraphLoss out;
  const auto rows = static_cast<Eigen::Index>(samples.size());
  out.z1.resize(rows, enc1.front().z.size());
  out.z2.resize(rows, enc2.front().z.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    out.z1.row(i) = enc1[static_cast<std::size_t>(i)].z;
    out.z2.row(i) = enc2[static_cast<std::size_t>(i)].z;
  }
  if (!grads) {
    out.loss = 0.5 * (info_nce(out.z1, out.z2, tau_s) + info_nce(out.z2, out.z1, tau_s));
    return out;
  }
  const auto sym = symmetric_info_nce(out.z1, out.z2, tau_s);
  out.loss = sym.loss;
  for (Eigen::Index i = 0; i < rows; ++i) {
    subgraph_backward(enc1[static_cast<std::size_t>(i)], params, sym.d_first.row(i), *grads);
    subgraph_backward(enc2[static_cast<std::size_t>(i)], params, sym.d_second.row(i), *grads);
  }
  return out;
}

double total_loss(double l_n, double l_e, double l_s, const LossWeights& w) {
  return l_n + w.lambda_e * l_e + w.lambda_s * l_s;
}

}  // namespace tahg
