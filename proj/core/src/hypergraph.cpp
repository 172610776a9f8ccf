#include "tahg/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tahg/error.hpp"

namespace tahg {

Incidence::Incidence(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& members)
    : num_nodes_(num_nodes) {
  col_ptr_.reserve(members.size() + 1);
  for (const auto& column : members) {
    std::vector<NodeId> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    row_idx_.insert(row_idx_.end(), sorted.begin(), sorted.end());
    col_ptr_.push_back(row_idx_.size());
  }
  build_rows();
}

void Incidence::build_rows() {
  row_ptr_.assign(num_nodes_ + 1, 0);
  for (NodeId v : row_idx_) ++row_ptr_[v + 1];
  for (std::size_t i = 0; i < num_nodes_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  col_idx_.assign(row_idx_.size(), 0);
  std::vector<std::size_t> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
  // Columns are visited in order, so each row's edge list comes out sorted.
  for (std::size_t e = 0; e + 1 < col_ptr_.size(); ++e) {
    for (std::size_t k = col_ptr_[e]; k < col_ptr_[e + 1]; ++k) {
      col_idx_[cursor[row_idx_[k]]++] = static_cast<EdgeId>(e);
    }
  }
}

Incidence Incidence::masked(std::span<const std::uint8_t> keep) const {
  if (keep.size() != nnz()) fail(ErrorCode::DimensionMismatch, "mask size differs from incidence count");
  Incidence out;
  out.num_nodes_ = num_nodes_;
  out.col_ptr_.assign(1, 0);
  out.col_ptr_.reserve(col_ptr_.size());
  for (std::size_t e = 0; e + 1 < col_ptr_.size(); ++e) {
    for (std::size_t k = col_ptr_[e]; k < col_ptr_[e + 1]; ++k) {
      if (keep[k]) out.row_idx_.push_back(row_idx_[k]);
    }
    out.col_ptr_.push_back(out.row_idx_.size());
  }
  out.build_rows();
  return out;
}

Incidence Incidence::restrict(std::span<const NodeId> nodes, std::span<const EdgeId> edges) const {
  std::vector<std::int64_t> local(num_nodes_, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) local[nodes[i]] = static_cast<std::int64_t>(i);
  std::vector<std::vector<NodeId>> columns;
  columns.reserve(edges.size());
  for (EdgeId e : edges) {
    std::vector<NodeId> column;
    for (NodeId v : members(e)) {
      if (local[v] >= 0) column.push_back(static_cast<NodeId>(local[v]));
    }
    columns.push_back(std::move(column));
  }
  return Incidence(nodes.size(), columns);
}

bool Incidence::contains(NodeId v, EdgeId e) const {
  auto m = members(e);
  return std::binary_search(m.begin(), m.end(), v);
}

Hypergraph build_hypergraph(std::size_t num_nodes,
                            const std::vector<std::vector<NodeId>>& hyperedges,
                            std::optional<std::vector<double>> weights) {
  for (std::size_t e = 0; e < hyperedges.size(); ++e) {
    if (hyperedges[e].empty()) fail(ErrorCode::EmptyHyperedge, "hyperedge " + std::to_string(e) + " has no members");
    for (NodeId v : hyperedges[e]) {
      if (v >= num_nodes) {
        fail(ErrorCode::NodeIdOutOfRange,
             "hyperedge " + std::to_string(e) + " references node " + std::to_string(v) + " but |V|=" +
                 std::to_string(num_nodes));
      }
    }
  }
  Hypergraph hg;
  if (weights) {
    if (weights->size() != hyperedges.size()) {
      fail(ErrorCode::DimensionMismatch, "weight count differs from hyperedge count");
    }
    for (std::size_t e = 0; e < weights->size(); ++e) {
      const double w = (*weights)[e];
      if (!(w > 0.0) || !std::isfinite(w)) {
        fail(ErrorCode::NonPositiveWeight, "hyperedge " + std::to_string(e) + " has weight " + std::to_string(w));
      }
    }
    hg.weights_ = std::move(*weights);
  } else {
    hg.weights_.assign(hyperedges.size(), 1.0);
  }
  hg.incidence_ = Incidence(num_nodes, hyperedges);
  hg.node_degrees_.assign(num_nodes, 0.0);
  for (NodeId v = 0; v < num_nodes; ++v) {
    double d = 0.0;
    for (EdgeId e : hg.incidence_.edges_of(v)) d += hg.weights_[e];
    hg.node_degrees_[v] = d;
  }
  return hg;
}

std::vector<NodeId> one_hop_neighbors(const Hypergraph& hg, NodeId v) {
  if (v >= hg.num_nodes()) fail(ErrorCode::NodeIdOutOfRange, "node " + std::to_string(v));
  std::vector<NodeId> out;
  for (EdgeId e : hg.edges_of(v)) {
    for (NodeId u : hg.members(e)) {
      if (u != v) out.push_back(u);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EdgeId> s_adjacent_hyperedges(const Hypergraph& hg, EdgeId e, std::size_t s) {
  if (e >= hg.num_edges()) fail(ErrorCode::HyperedgeIdOutOfRange, "hyperedge " + std::to_string(e));
  if (s < 1) fail(ErrorCode::InvalidS, "s must be at least 1");
  std::vector<EdgeId> touched;
  for (NodeId v : hg.members(e)) {
    for (EdgeId f : hg.edges_of(v)) {
      if (f != e) touched.push_back(f);
    }
  }
  // Each occurrence of f in touched is one shared member.
  std::sort(touched.begin(), touched.end());
  std::vector<EdgeId> out;
  for (std::size_t i = 0; i < touched.size();) {
    std::size_t j = i;
    while (j < touched.size() && touched[j] == touched[i]) ++j;
    if (j - i >= s) out.push_back(touched[i]);
    i = j;
  }
  return out;
}

PairwiseGraph::PairwiseGraph(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges)
    : adjacency_(num_nodes) {
  for (auto [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      fail(ErrorCode::InvalidGraph, "edge (" + std::to_string(u) + "," + std::to_string(v) + ") out of range");
    }
    if (u == v) fail(ErrorCode::InvalidGraph, "self-loop on node " + std::to_string(u));
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    num_edges_ += list.size();
  }
  num_edges_ /= 2;
}

bool PairwiseGraph::has_edge(NodeId u, NodeId v) const {
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

std::vector<std::pair<NodeId, NodeId>> PairwiseGraph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(num_edges_);
  for (NodeId u = 0; u < adjacency_.size(); ++u) {
    for (NodeId v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

void NodeLabels::validate() const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto c = labels[i];
    if (c == kUnlabeled) continue;
    if (c < 0 || c >= num_classes) {
      fail(ErrorCode::InvariantViolation,
           "node " + std::to_string(i) + " has class " + std::to_string(c) + " outside [0," +
               std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace tahg
