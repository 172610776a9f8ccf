#include "tahg/hgnn.hpp"

#include <cmath>
#include <string>

#include "binary_io.hpp"
#include "tahg/error.hpp"

namespace tahg {
namespace {

Matrix prelu(const Matrix& a, double slope) {
  return a.unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
}

// Returns dL/da and accumulates dL/dslope.
Matrix prelu_backward(const Matrix& a, const Matrix& grad, double slope, double& d_slope) {
  Matrix out(a.rows(), a.cols());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i];
    const double g = grad.data()[i];
    if (x > 0.0) {
      out.data()[i] = g;
    } else {
      out.data()[i] = slope * g;
      acc += g * x;
    }
  }
  d_slope += acc;
  return out;
}

void init_block(Matrix& m, std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

void init_block(RowVector& v, std::size_t n, double bound, Rng& rng) {
  v.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-bound, bound);
}

}  // namespace

HgnnParams HgnnParams::init(const HgnnDims& dims, Rng& rng) {
  if (dims.layers == 0 || dims.d_in == 0 || dims.d_hidden == 0 || dims.d_out == 0) {
    fail(ErrorCode::InvalidConfig, "HGNN dimensions and layer count must be positive");
  }
  HgnnParams p;
  for (std::size_t l = 0; l < dims.layers; ++l) {
    const std::size_t in = l == 0 ? dims.d_in : dims.d_out;
    HgnnLayer layer;
    const double be = 1.0 / std::sqrt(static_cast<double>(in));
    const double bv = 1.0 / std::sqrt(static_cast<double>(dims.d_hidden));
    init_block(layer.theta_e, in, dims.d_hidden, be, rng);
    init_block(layer.b_e, dims.d_hidden, be, rng);
    init_block(layer.theta_v, dims.d_hidden, dims.d_out, bv, rng);
    init_block(layer.b_v, dims.d_out, bv, rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

HgnnParams HgnnParams::zeros_like() const {
  HgnnParams z;
  for (const auto& l : layers) {
    HgnnLayer g;
    g.theta_e = Matrix::Zero(l.theta_e.rows(), l.theta_e.cols());
    g.b_e = RowVector::Zero(l.b_e.size());
    g.theta_v = Matrix::Zero(l.theta_v.rows(), l.theta_v.cols());
    g.b_v = RowVector::Zero(l.b_v.size());
    g.slope_e = 0.0;
    g.slope_v = 0.0;
    z.layers.push_back(std::move(g));
  }
  return z;
}

HgnnDims HgnnParams::dims() const {
  HgnnDims d;
  d.layers = layers.size();
  if (!layers.empty()) {
    d.d_in = static_cast<std::size_t>(layers.front().theta_e.rows());
    d.d_hidden = static_cast<std::size_t>(layers.front().theta_e.cols());
    d.d_out = static_cast<std::size_t>(layers.back().theta_v.cols());
  }
  return d;
}

void HgnnParams::for_each_block(const std::function<void(std::size_t, double*, std::size_t)>& fn) {
  std::size_t slot = 0;
  for (auto& l : layers) {
    fn(slot++, l.theta_e.data(), static_cast<std::size_t>(l.theta_e.size()));
    fn(slot++, l.b_e.data(), static_cast<std::size_t>(l.b_e.size()));
    fn(slot++, l.theta_v.data(), static_cast<std::size_t>(l.theta_v.size()));
    fn(slot++, l.b_v.data(), static_cast<std::size_t>(l.b_v.size()));
    fn(slot++, &l.slope_e, 1);
    fn(slot++, &l.slope_v, 1);
  }
}

void HgnnParams::for_each_block(const std::function<void(std::size_t, const double*, std::size_t)>& fn) const {
  const_cast<HgnnParams*>(this)->for_each_block(
      [&fn](std::size_t slot, double* data, std::size_t n) { fn(slot, data, n); });
}

std::size_t HgnnParams::num_parameters() const {
  std::size_t n = 0;
  for_each_block([&n](std::size_t, const double*, std::size_t k) { n += k; });
  return n;
}

void HgnnParams::add_scaled(const HgnnParams& other, double alpha) {
  std::vector<std::pair<const double*, std::size_t>> src;
  other.for_each_block([&src](std::size_t, const double* d, std::size_t n) { src.emplace_back(d, n); });
  for_each_block([&](std::size_t slot, double* d, std::size_t n) {
    if (slot >= src.size() || src[slot].second != n) fail(ErrorCode::DimensionMismatch, "parameter shapes differ");
    for (std::size_t i = 0; i < n; ++i) d[i] += alpha * src[slot].first[i];
  });
}

bool HgnnParams::all_finite() const {
  bool ok = true;
  for_each_block([&ok](std::size_t, const double* d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) ok = ok && std::isfinite(d[i]);
  });
  return ok;
}

void HgnnParams::write(std::ostream& out) const {
  const auto d = dims();
  io::write_magic(out, "HITECHG1");
  io::write_u64(out, d.layers);
  io::write_u64(out, d.d_in);
  io::write_u64(out, d.d_hidden);
  io::write_u64(out, d.d_out);
  for_each_block([&out](std::size_t, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) io::write_f64(out, data[i]);
  });
}

HgnnParams HgnnParams::read(std::istream& in) {
  io::expect_magic(in, "HITECHG1");
  HgnnDims d;
  d.layers = io::read_u64(in);
  d.d_in = io::read_u64(in);
  d.d_hidden = io::read_u64(in);
  d.d_out = io::read_u64(in);
  if (d.layers > 64 || d.d_in > (1u << 16) || d.d_hidden > (1u << 16) || d.d_out > (1u << 16)) {
    fail(ErrorCode::BadFormat, "implausible HGNN dimensions");
  }
  Rng dummy(0);
  HgnnParams p = HgnnParams::init(d, dummy);
  p.for_each_block([&in](std::size_t, double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) data[i] = io::read_f64(in);
  });
  return p;
}

EncodeOutput hgnn_forward(const Incidence& incidence, const Matrix& features, std::span<const double> weights,
                          const HgnnParams& params, bool keep_cache) {
  if (params.layers.empty()) fail(ErrorCode::InvalidConfig, "HGNN has no layers");
  const auto n = static_cast<Eigen::Index>(incidence.num_nodes());
  const auto m = static_cast<Eigen::Index>(incidence.num_edges());
  if (features.rows() != n || features.cols() != params.layers.front().theta_e.rows()) {
    fail(ErrorCode::DimensionMismatch, "features are " + std::to_string(features.rows()) + "x" +
                                           std::to_string(features.cols()) + ", expected " + std::to_string(n) +
                                           "x" + std::to_string(params.layers.front().theta_e.rows()));
  }
  if (!weights.empty() && static_cast<Eigen::Index>(weights.size()) != m) {
    fail(ErrorCode::DimensionMismatch, "one weight per hyperedge required");
  }
  if (!features.allFinite()) fail(ErrorCode::NonFiniteInput, "features contain NaN/Inf");

  EncodeOutput out;
  out.incidence = incidence;
  out.weights.assign(weights.begin(), weights.end());
  if (out.weights.empty()) out.weights.assign(static_cast<std::size_t>(m), 1.0);
  out.inv_edge_degree.resize(static_cast<std::size_t>(m));
  for (EdgeId e = 0; e < m; ++e) {
    const auto k = incidence.edge_size(e);
    out.inv_edge_degree[e] = k ? 1.0 / static_cast<double>(k) : 0.0;
  }
  out.inv_node_degree.resize(static_cast<std::size_t>(n));
  for (NodeId v = 0; v < n; ++v) {
    double d = 0.0;
    for (EdgeId e : incidence.edges_of(v)) d += out.weights[e];
    out.inv_node_degree[v] = d > 0.0 ? 1.0 / d : 0.0;
  }

  Matrix z_v = features;
  Matrix z_e;
  for (const auto& layer : params.layers) {
    LayerCache c;
    c.msg_e = Matrix::Zero(m, z_v.cols());
    for (EdgeId e = 0; e < m; ++e) {
      for (NodeId v : incidence.members(e)) c.msg_e.row(e) += z_v.row(v);
      c.msg_e.row(e) *= out.inv_edge_degree[e];
    }
    c.pre_e = c.msg_e * layer.theta_e;
    c.pre_e.rowwise() += layer.b_e;
    z_e = prelu(c.pre_e, layer.slope_e);

    c.msg_v = Matrix::Zero(n, z_e.cols());
    for (NodeId v = 0; v < n; ++v) {
      for (EdgeId e : incidence.edges_of(v)) c.msg_v.row(v) += out.weights[e] * z_e.row(e);
      c.msg_v.row(v) *= out.inv_node_degree[v];
    }
    c.pre_v = c.msg_v * layer.theta_v;
    c.pre_v.rowwise() += layer.b_v;
    Matrix next = prelu(c.pre_v, layer.slope_v);
    if (keep_cache) {
      c.input = std::move(z_v);
      c.z_e = z_e;
      out.cache.push_back(std::move(c));
    }
    z_v = std::move(next);
  }
  out.z_v = std::move(z_v);
  out.z_e = std::move(z_e);
  return out;
}

EncodeOutput hgnn_forward(const AugmentedView& view, const HgnnParams& params, std::span<const double> weights) {
  return hgnn_forward(view.incidence, view.features, weights, params, true);
}

HgnnGradients hgnn_backward(const EncodeOutput& out, const HgnnParams& params, const Matrix& grad_zv,
                            const Matrix* grad_ze, bool want_feature_grad) {
  if (out.cache.size() != params.layers.size()) {
    fail(ErrorCode::MissingForwardCache, "forward pass was run without a cache");
  }
  if (grad_zv.rows() != out.z_v.rows() || grad_zv.cols() != out.z_v.cols()) {
    fail(ErrorCode::DimensionMismatch, "grad_zv shape differs from Z_V");
  }
  if (grad_ze && (grad_ze->rows() != out.z_e.rows() || grad_ze->cols() != out.z_e.cols())) {
    fail(ErrorCode::DimensionMismatch, "grad_ze shape differs from Z_E");
  }
  const auto& inc = out.incidence;
  const auto n = static_cast<Eigen::Index>(inc.num_nodes());
  const auto m = static_cast<Eigen::Index>(inc.num_edges());

  HgnnGradients g;
  g.params = params.zeros_like();
  Matrix d_zv = grad_zv;
  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const auto& layer = params.layers[li];
    const auto& c = out.cache[li];
    auto& gl = g.params.layers[li];

    const Matrix d_pre_v = prelu_backward(c.pre_v, d_zv, layer.slope_v, gl.slope_v);
    gl.theta_v = c.msg_v.transpose() * d_pre_v;
    gl.b_v = d_pre_v.colwise().sum();
    const Matrix d_msg_v = d_pre_v * layer.theta_v.transpose();

    Matrix d_ze = (grad_ze && li + 1 == params.layers.size()) ? *grad_ze : Matrix::Zero(m, c.z_e.cols());
    for (NodeId v = 0; v < n; ++v) {
      const double s = out.inv_node_degree[v];
      if (s == 0.0) continue;
      for (EdgeId e : inc.edges_of(v)) d_ze.row(e) += (s * out.weights[e]) * d_msg_v.row(v);
    }

    const Matrix d_pre_e = prelu_backward(c.pre_e, d_ze, layer.slope_e, gl.slope_e);
    gl.theta_e = c.msg_e.transpose() * d_pre_e;
    gl.b_e = d_pre_e.colwise().sum();
    const Matrix d_msg_e = d_pre_e * layer.theta_e.transpose();

    if (li == 0 && !want_feature_grad) break;
    Matrix d_in = Matrix::Zero(n, c.input.cols());
    for (EdgeId e = 0; e < m; ++e) {
      const double s = out.inv_edge_degree[e];
      for (NodeId v : inc.members(e)) d_in.row(v) += s * d_msg_e.row(e);
    }
    d_zv = std::move(d_in);
  }
  if (want_feature_grad) g.features = std::move(d_zv);
  return g;
}

SubgraphEncoding subgraph_encode(const AugmentedView& view, const SubgraphSample& sub, const HgnnParams& params,
                                 std::span<const double> weights) {
  if (sub.nodes.empty() || sub.hyperedges.empty()) fail(ErrorCode::EmptySubgraph, "subgraph has no nodes or hyperedges");
  for (NodeId v : sub.nodes) {
    if (v >= view.incidence.num_nodes()) fail(ErrorCode::NodeIdOutOfRange, "subgraph node " + std::to_string(v));
  }
  for (EdgeId e : sub.hyperedges) {
    if (e >= view.incidence.num_edges()) {
      fail(ErrorCode::HyperedgeIdOutOfRange, "subgraph hyperedge " + std::to_string(e));
    }
  }
  const Incidence local = view.incidence.restrict(sub.nodes, sub.hyperedges);
  Matrix feats(static_cast<Eigen::Index>(sub.nodes.size()), view.features.cols());
  for (std::size_t i = 0; i < sub.nodes.size(); ++i) {
    feats.row(static_cast<Eigen::Index>(i)) = view.features.row(sub.nodes[i]);
  }
  std::vector<double> local_w;
  if (!weights.empty()) {
    for (EdgeId e : sub.hyperedges) local_w.push_back(weights[e]);
  }
  SubgraphEncoding enc;
  enc.out = hgnn_forward(local, feats, local_w, params, true);
  enc.z = enc.out.z_v.colwise().mean();
  return enc;
}

RowVector subgraph_forward(const AugmentedView& view, const SubgraphSample& sub, const HgnnParams& params,
                           std::span<const double> weights) {
  return subgraph_encode(view, sub, params, weights).z;
}

void subgraph_backward(const SubgraphEncoding& enc, const HgnnParams& params, const RowVector& grad_z,
                       HgnnParams& grads) {
  const auto rows = enc.out.z_v.rows();
  Matrix d_zv = (grad_z / static_cast<double>(rows)).replicate(rows, 1);
  const auto g = hgnn_backward(enc.out, params, d_zv, nullptr, false);
  grads.add_scaled(g.params, 1.0);
}

}  // namespace tahg
