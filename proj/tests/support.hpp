#pragma once

// Random instance generators and brute-force reference implementations shared
// by the unit, property and acceptance tests. Oracles here are written
// independently of the library code they check: dense matrices, double loops
// and exhaustive enumeration only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <utility>
#include <vector>

#include "tahg/error.hpp"
#include "tahg/hgnn.hpp"
#include "tahg/hypergraph.hpp"
#include "tahg/rng.hpp"
#include "tahg/types.hpp"

namespace tahg::test {

// ---- generators -----------------------------------------------------------

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

// Hyperedge member lists; sizes uniform in [min_size, max_size], distinct ids.
inline std::vector<std::vector<NodeId>> random_edge_lists(std::size_t n, std::size_t m, std::size_t min_size,
                                                          std::size_t max_size, Rng& rng) {
  std::vector<std::vector<NodeId>> edges;
  for (std::size_t e = 0; e < m; ++e) {
    const std::size_t k = std::min(n, min_size + rng.uniform_index(max_size - min_size + 1));
    std::vector<NodeId> members;
    while (members.size() < k) {
      const auto v = static_cast<NodeId>(rng.uniform_index(n));
      if (std::find(members.begin(), members.end(), v) == members.end()) members.push_back(v);
    }
    edges.push_back(std::move(members));
  }
  return edges;
}

inline Hypergraph random_hypergraph(std::size_t n, std::size_t m, std::size_t min_size, std::size_t max_size,
                                    Rng& rng) {
  return build_hypergraph(n, random_edge_lists(n, m, min_size, max_size, rng));
}

// Every node covered: a chain of overlapping hyperedges followed by random ones.
inline Hypergraph random_connected_hypergraph(std::size_t n, std::size_t extra, std::size_t max_size, Rng& rng) {
  std::vector<std::vector<NodeId>> edges;
  for (NodeId v = 0; v + 1 < n; v += 2) {
    std::vector<NodeId> e{v, static_cast<NodeId>(v + 1)};
    if (v + 2 < n) e.push_back(static_cast<NodeId>(v + 2));
    edges.push_back(std::move(e));
  }
  auto more = random_edge_lists(n, extra, 2, max_size, rng);
  edges.insert(edges.end(), more.begin(), more.end());
  return build_hypergraph(n, edges);
}

inline std::vector<std::pair<NodeId, NodeId>> random_pairs(std::size_t n, double density, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(density)) out.emplace_back(u, v);
    }
  }
  return out;
}

// ---- dense views of sparse structure --------------------------------------

inline Matrix dense_incidence(const Incidence& inc) {
  Matrix h = Matrix::Zero(static_cast<Eigen::Index>(inc.num_nodes()), static_cast<Eigen::Index>(inc.num_edges()));
  for (EdgeId e = 0; e < inc.num_edges(); ++e) {
    for (NodeId v : inc.members(e)) h(v, e) = 1.0;
  }
  return h;
}

// ---- oracles --------------------------------------------------------------

// Maximal cliques of size >= 2 by enumerating every vertex subset.
inline std::vector<std::vector<NodeId>> brute_force_cliques(std::size_t n,
                                                            const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [u, v] : pairs) adj[u][v] = adj[v][u] = true;
  std::vector<unsigned> cliques;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    bool ok = true;
    for (unsigned i = 0; i < n && ok; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (unsigned j = i + 1; j < n && ok; ++j) {
        if ((mask >> j & 1u) && !adj[i][j]) ok = false;
      }
    }
    if (ok) cliques.push_back(mask);
  }
  std::vector<std::vector<NodeId>> out;
  for (unsigned c : cliques) {
    if (__builtin_popcount(c) < 2) continue;
    bool maximal = true;
    for (unsigned d : cliques) {
      if (d != c && (d & c) == c) {
        maximal = false;
        break;
      }
    }
    if (!maximal) continue;
    std::vector<NodeId> members;
    for (unsigned i = 0; i < n; ++i) {
      if (c >> i & 1u) members.push_back(i);
    }
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double brute_cosine(const RowVector& a, const RowVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double brute_cohesiveness(const Matrix& x, const std::vector<NodeId>& members) {
  if (members.size() == 1) return 1.0;
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      total += brute_cosine(x.row(members[i]), x.row(members[j]));
      ++pairs;
    }
  }
  return total / static_cast<double>(pairs);
}

// Direct evaluation of the softmax cross-entropy without any max shift.
inline double brute_info_nce(const Matrix& a, const Matrix& c, double tau) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double denom = 0.0;
    for (Eigen::Index k = 0; k < c.rows(); ++k) denom += std::exp(brute_cosine(a.row(i), c.row(k)) / tau);
    total += -std::log(std::exp(brute_cosine(a.row(i), c.row(i)) / tau) / denom);
  }
  return total / static_cast<double>(a.rows());
}

inline double prelu_ref(double x, double slope) { return x >= 0.0 ? x : slope * x; }

// Dense-matrix evaluation of the encoder: per layer
//   Z_E = PReLU(De⁻¹ Hᵀ Z Θ_E + b_e),  Z = PReLU(Dv⁻¹ H W Z_E Θ_V + b_v)
// with zero inverse degree for empty rows and columns.
struct DenseForward {
  Matrix z_v;
  Matrix z_e;
};
inline DenseForward dense_hgnn(const Matrix& h, const Matrix& x, const std::vector<double>& weights,
                               const HgnnParams& p) {
  const auto n = h.rows();
  const auto m = h.cols();
  Matrix w = Matrix::Identity(m, m);
  for (Eigen::Index j = 0; j < m && !weights.empty(); ++j) w(j, j) = weights[static_cast<std::size_t>(j)];
  Matrix de_inv = Matrix::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double d = h.col(j).sum();
    de_inv(j, j) = d > 0 ? 1.0 / d : 0.0;
  }
  Matrix dv_inv = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) d += w(j, j) * h(i, j);
    dv_inv(i, i) = d > 0 ? 1.0 / d : 0.0;
  }
  DenseForward out;
  Matrix z = x;
  for (const auto& layer : p.layers) {
    Matrix pre_e = de_inv * h.transpose() * z * layer.theta_e;
    pre_e.rowwise() += layer.b_e;
    out.z_e = pre_e.unaryExpr([&](double t) { return prelu_ref(t, layer.slope_e); });
    Matrix pre_v = dv_inv * h * w * out.z_e * layer.theta_v;
    pre_v.rowwise() += layer.b_v;
    z = pre_v.unaryExpr([&](double t) { return prelu_ref(t, layer.slope_v); });
  }
  out.z_v = z;
  return out;
}

// ---- finite differences ---------------------------------------------------

// Worst elementwise relative error |a - n| / max(|a|, |n|, floor) between the
// analytic gradient and a central difference with step h.
inline double fd_worst_relative_error(std::vector<double*> params, const std::vector<double>& analytic,
                                      const std::function<double()>& loss, double h = 1e-5, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = *params[i];
    *params[i] = keep + h;
    const double up = loss();
    *params[i] = keep - h;
    const double down = loss();
    *params[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), floor});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

// Flattened pointers into every HGNN parameter, in block order.
inline std::vector<double*> param_pointers(HgnnParams& p) {
  std::vector<double*> out;
  p.for_each_block([&out](std::size_t, double* d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(d + i);
  });
  return out;
}

inline std::vector<double> param_values(const HgnnParams& p) {
  std::vector<double> out;
  p.for_each_block([&out](std::size_t, const double* d, std::size_t n) { out.insert(out.end(), d, d + n); });
  return out;
}

}  // namespace tahg::test

// Expects `stmt` to throw tahg::Error with the given code.
#define EXPECT_TAHG_ERROR(stmt, expected_code)                                          \
  do {                                                                                  \
    bool thrown_ = false;                                                               \
    try {                                                                               \
      stmt;                                                                             \
    } catch (const ::tahg::Error& e_) {                                                 \
      thrown_ = true;                                                                   \
      EXPECT_EQ(e_.code(), expected_code) << e_.what();                                 \
    }                                                                                   \
    EXPECT_TRUE(thrown_) << "expected " << ::tahg::to_string(expected_code);            \
  } while (0)
