#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "tahg/hypergraph.hpp"
#include "tahg/rng.hpp"
#include "tahg/types.hpp"

namespace tahg {

struct SplitSpec {
  double train = 0.1;
  double val = 0.1;
  double test = 0.8;
  std::size_t num_splits = 20;
  std::size_t inits_per_split = 5;
  std::uint64_t seed = 0;

  static SplitSpec node_classification() { return {}; }
  static SplitSpec hyperedge_prediction() { return {0.6, 0.2, 0.2, 20, 5, 0}; }

  // Fractions positive and summing to 1 within 1e-9; counts positive.
  void validate() const;
};

// Disjoint index sets covering 0..n-1. The train and val sizes are
// round(fraction * n); test takes the rest.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};
Split make_split(std::size_t n, const SplitSpec& spec, std::size_t split_index);

struct EvalReport {
  std::string task;
  double mean = 0.0;  // percent
  double std = 0.0;   // population standard deviation, percent
  std::vector<double> per_split;  // one accuracy per (split, init), split-major
  std::string config_hash;
};

// Fills mean and std from per_split.
void summarize(EvalReport& report);
std::string to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

inline constexpr double kDefaultL2Grid[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};

// Multinomial logistic regression on frozen features, fit by full-batch
// gradient descent with backtracking line search. The l2 strength is chosen
// per run by validation accuracy. Unlabeled nodes are ignored.
// Throws DegenerateSplit, InvalidParams.
EvalReport linear_probe(const Matrix& z, const NodeLabels& labels, const SplitSpec& spec,
                        std::span<const double> l2_grid = kDefaultL2Grid);

// Clique negative sampling. A negative for hyperedge e swaps one member u for
// an outside node v that shares a hyperedge with every remaining member, and
// must not coincide with an existing hyperedge.
class CnsSampler {
 public:
  explicit CnsSampler(const Hypergraph& hg);

  // Sorted negative node set, or nullopt when no (u, v) pair qualifies.
  std::optional<std::vector<NodeId>> sample(EdgeId e, Rng& rng) const;

  // Checks all validity conditions for a negative derived from e.
  bool is_valid_negative(EdgeId e, const std::vector<NodeId>& candidate) const;
  bool is_existing(const std::vector<NodeId>& sorted_members) const;

 private:
  const Hypergraph* hg_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::unordered_set<std::uint64_t> edge_hashes_;
  std::vector<std::vector<NodeId>> edges_sorted_;
};

// Throws NoEligibleNegative (also when δ(e) < 2).
std::vector<NodeId> cns_negative(const Hypergraph& hg, EdgeId e, Rng& rng);

struct MlpConfig {
  std::size_t hidden = 128;
  std::size_t epochs = 200;
  double lr = 1e-2;
  double weight_decay = 0.0;
};

// Real hyperedges (δ ≥ 2) against one CNS negative each; candidate sets are
// represented by the mean of their members' embeddings and scored by a
// two-layer ReLU perceptron at threshold 0.5. Pairs are split together.
// Hyperedges without any eligible negative are left out.
// Throws DegenerateSplit when fewer than 10 pairs remain.
EvalReport hyperedge_prediction(const Matrix& z, const Hypergraph& hg, const SplitSpec& spec, Rng& rng,
                                const MlpConfig& mlp = {});

}  // namespace tahg
