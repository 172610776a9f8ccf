#include <algorithm>
#include <vector>

#include "tahg/hypergraph.hpp"

namespace tahg {
namespace {

// Bron–Kerbosch with Tomita pivoting; the outer loop follows a degeneracy
// ordering so that each top-level call sees at most `degeneracy` candidates.
class CliqueEnumerator {
 public:
  explicit CliqueEnumerator(const PairwiseGraph& g) : g_(g) {}

  std::vector<std::vector<NodeId>> run() {
    const auto order = degeneracy_order();
    std::vector<std::size_t> position(g_.num_nodes());
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = i;

    for (NodeId v : order) {
      std::vector<NodeId> candidates;
      std::vector<NodeId> excluded;
      for (NodeId u : g_.neighbors(v)) {
        (position[u] > position[v] ? candidates : excluded).push_back(u);
      }
      std::vector<NodeId> clique{v};
      expand(clique, candidates, excluded);
    }
    for (auto& c : cliques_) std::sort(c.begin(), c.end());
    std::sort(cliques_.begin(), cliques_.end());
    return std::move(cliques_);
  }

 private:
  std::vector<NodeId> degeneracy_order() const {
    const std::size_t n = g_.num_nodes();
    std::vector<std::size_t> degree(n);
    std::size_t max_degree = 0;
    for (NodeId v = 0; v < n; ++v) {
      degree[v] = g_.neighbors(v).size();
      max_degree = std::max(max_degree, degree[v]);
    }
    std::vector<std::vector<NodeId>> buckets(max_degree + 1);
    for (NodeId v = 0; v < n; ++v) buckets[degree[v]].push_back(v);
    std::vector<bool> removed(n, false);
    std::vector<NodeId> order;
    order.reserve(n);
    std::size_t d = 0;
    while (order.size() < n) {
      d = 0;
      while (buckets[d].empty()) ++d;
      // Smallest id among the minimum-degree bucket keeps the order deterministic.
      auto it = std::min_element(buckets[d].begin(), buckets[d].end());
      const NodeId v = *it;
      buckets[d].erase(it);
      if (removed[v]) continue;
      removed[v] = true;
      order.push_back(v);
      for (NodeId u : g_.neighbors(v)) {
        if (removed[u]) continue;
        auto& bucket = buckets[degree[u]];
        bucket.erase(std::find(bucket.begin(), bucket.end(), u));
        --degree[u];
        buckets[degree[u]].push_back(u);
      }
    }
    return order;
  }

  std::vector<NodeId> intersect_neighbors(const std::vector<NodeId>& set, NodeId v) const {
    std::vector<NodeId> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    std::vector<NodeId> out;
    auto nb = g_.neighbors(v);
    std::set_intersection(sorted.begin(), sorted.end(), nb.begin(), nb.end(), std::back_inserter(out));
    return out;
  }

  void expand(std::vector<NodeId>& clique, std::vector<NodeId> candidates, std::vector<NodeId> excluded) {
    if (candidates.empty()) {
      if (excluded.empty() && clique.size() >= 2) cliques_.push_back(clique);
      return;
    }
    // Pivot maximizing |candidates ∩ N(pivot)| over candidates ∪ excluded.
    NodeId pivot = candidates.front();
    std::size_t best = 0;
    bool first = true;
    for (const auto* pool : {&candidates, &excluded}) {
      for (NodeId u : *pool) {
        const std::size_t count = intersect_neighbors(candidates, u).size();
        if (first || count > best) {
          pivot = u;
          best = count;
          first = false;
        }
      }
    }
    std::vector<NodeId> branch;
    for (NodeId u : candidates) {
      if (!g_.has_edge(pivot, u)) branch.push_back(u);
    }
    for (NodeId u : branch) {
      clique.push_back(u);
      expand(clique, intersect_neighbors(candidates, u), intersect_neighbors(excluded, u));
      clique.pop_back();
      candidates.erase(std::find(candidates.begin(), candidates.end(), u));
      excluded.push_back(u);
    }
  }

  const PairwiseGraph& g_;
  std::vector<std::vector<NodeId>> cliques_;
};

}  // namespace

std::vector<std::vector<NodeId>> reconstruct_from_graph(const PairwiseGraph& g) {
  return CliqueEnumerator(g).run();
}

}  // namespace tahg
