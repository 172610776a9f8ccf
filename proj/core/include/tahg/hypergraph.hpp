#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tahg/types.hpp"

namespace tahg {

// Binary |V|x|E| incidence in compressed-column form with a compressed-row
// mirror. Columns may be empty here (masked views keep emptied hyperedges as
// zero columns); Hypergraph adds the non-empty invariant on top.
class Incidence {
 public:
  Incidence() = default;

  // members[e] lists the node ids of column e; ids are sorted and deduplicated.
  Incidence(std::size_t num_nodes, const std::vector<std::vector<NodeId>>& members);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return col_ptr_.empty() ? 0 : col_ptr_.size() - 1; }
  std::size_t nnz() const { return row_idx_.size(); }

  std::span<const NodeId> members(EdgeId e) const {
    return {row_idx_.data() + col_ptr_[e], row_idx_.data() + col_ptr_[e + 1]};
  }
  std::span<const EdgeId> edges_of(NodeId v) const {
    return {col_idx_.data() + row_ptr_[v], col_idx_.data() + row_ptr_[v + 1]};
  }
  std::size_t edge_size(EdgeId e) const { return col_ptr_[e + 1] - col_ptr_[e]; }
  std::size_t node_edge_count(NodeId v) const { return row_ptr_[v + 1] - row_ptr_[v]; }

  // Offset of column e in the edge-major incidence order; incidence k of the
  // flat order belongs to the column containing k.
  std::size_t column_offset(EdgeId e) const { return col_ptr_[e]; }
  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const NodeId> row_indices() const { return row_idx_; }

  // Keeps incidence k (edge-major order) iff keep[k] != 0.
  Incidence masked(std::span<const std::uint8_t> keep) const;

  // Sub-incidence on the given node rows and edge columns (renumbered in the
  // order given). Entries whose node is not listed are dropped.
  Incidence restrict(std::span<const NodeId> nodes, std::span<const EdgeId> edges) const;

  bool contains(NodeId v, EdgeId e) const;

  friend bool operator==(const Incidence&, const Incidence&) = default;

 private:
  void build_rows();

  std::size_t num_nodes_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<NodeId> row_idx_;
  std::vector<std::size_t> row_ptr_;
  std::vector<EdgeId> col_idx_;
};

class Hypergraph;

// Validates and builds. Hyperedge order is preserved; duplicate hyperedges stay
// distinct columns; duplicate ids inside one hyperedge collapse (h_ij is 0/1).
// Throws EmptyHyperedge, NodeIdOutOfRange, NonPositiveWeight.
Hypergraph build_hypergraph(std::size_t num_nodes,
                            const std::vector<std::vector<NodeId>>& hyperedges,
                            std::optional<std::vector<double>> weights = std::nullopt);

// Immutable weighted hypergraph: incidence H, hyperedge weights W, and cached
// degrees D_v (weighted) and D_e (member counts). Safe to share across readers.
class Hypergraph {
 public:
  Hypergraph() = default;

  const Incidence& incidence() const { return incidence_; }
  std::size_t num_nodes() const { return incidence_.num_nodes(); }
  std::size_t num_edges() const { return incidence_.num_edges(); }
  std::size_t nnz() const { return incidence_.nnz(); }

  std::span<const NodeId> members(EdgeId e) const { return incidence_.members(e); }
  std::span<const EdgeId> edges_of(NodeId v) const { return incidence_.edges_of(v); }

  std::span<const double> weights() const { return weights_; }
  double weight(EdgeId e) const { return weights_[e]; }
  double node_degree(NodeId v) const { return node_degrees_[v]; }
  std::size_t edge_degree(EdgeId e) const { return incidence_.edge_size(e); }
  std::span<const double> node_degrees() const { return node_degrees_; }

  friend Hypergraph build_hypergraph(std::size_t num_nodes,
                                     const std::vector<std::vector<NodeId>>& hyperedges,
                                     std::optional<std::vector<double>> weights);

 private:
  Incidence incidence_;
  std::vector<double> weights_;
  std::vector<double> node_degrees_;
};

// Nodes sharing at least one hyperedge with v, excluding v. Sorted ascending.
std::vector<NodeId> one_hop_neighbors(const Hypergraph& hg, NodeId v);

// Hyperedges e' != e with |e ∩ e'| >= s. Sorted ascending.
std::vector<EdgeId> s_adjacent_hyperedges(const Hypergraph& hg, EdgeId e, std::size_t s);

// Simple undirected graph used as input to clique reconstruction.
class PairwiseGraph {
 public:
  // Pairs are stored unordered; repeated pairs collapse. Self-loops and
  // out-of-range endpoints throw InvalidGraph.
  PairwiseGraph(std::size_t num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges);

  std::size_t num_nodes() const { return adjacency_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  // Sorted neighbor list.
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_[v]; }
  bool has_edge(NodeId u, NodeId v) const;
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t num_edges_ = 0;
};

// All maximal cliques of size >= 2, each sorted, the list sorted
// lexicographically (which orders by smallest member first).
std::vector<std::vector<NodeId>> reconstruct_from_graph(const PairwiseGraph& g);

struct NodeLabels {
  static constexpr std::int32_t kUnlabeled = -1;

  std::vector<std::int32_t> labels;  // one per node, kUnlabeled when absent
  std::int32_t num_classes = 0;

  bool has_labels() const { return num_classes > 0; }
  // Checks every labeled node's class is in [0, num_classes).
  void validate() const;
};

}  // namespace tahg
