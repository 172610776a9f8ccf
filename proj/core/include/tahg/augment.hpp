#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tahg/corpus.hpp"
#include "tahg/hypergraph.hpp"
#include "tahg/rng.hpp"
#include "tahg/text_encoder.hpp"
#include "tahg/types.hpp"

namespace tahg {

struct PromptConfig {
  std::string domain_text;
  std::size_t max_neighbor_snippets = 3;
  std::size_t snippet_len = 64;  // characters taken from each neighbor text
  bool include_domain = true;
  bool include_topology = true;
  bool include_context = true;
  std::string domain_header = "Domain:";
  std::string topology_header = "Topology:";
  std::string context_header = "Context:";

  void validate() const;
};

struct DropConfig {
  double tau_drop = 0.1;

  void validate() const;
};

// One augmented hypergraph: node features plus the masked incidence
// H̃ = M ⊙ H. mask is aligned with the edge-major incidence order of H.
struct AugmentedView {
  Matrix features;
  Incidence incidence;
  std::vector<std::uint8_t> mask;
};

// Original text followed by the enabled, non-empty sections, one per line:
// domain text; node degree and incident hyperedge sizes; up to
// max_neighbor_snippets neighbor-text prefixes (neighbors drawn without
// replacement). Throws NodeIdOutOfRange.
std::string build_prompt(NodeId v, const Hypergraph& hg, const TextCorpus& corpus, const PromptConfig& cfg, Rng& rng);

// Mean pairwise cosine similarity of the members' feature rows. Singleton
// hyperedges score 1. A zero member row throws ZeroFeatureRow unless lenient,
// in which case its similarities count as 0.
double cohesiveness(const Hypergraph& hg, const Matrix& features, EdgeId e, bool lenient = false);
std::vector<double> cohesiveness_scores(const Hypergraph& hg, const Matrix& features, bool lenient = false);

// p_drop = 1 − σ((s(e) − 0.5) / τ_drop), repeated for each incidence of e in
// edge-major order. Throws NonPositiveTemperature.
std::vector<double> drop_probabilities(const Hypergraph& hg, const std::vector<double>& scores,
                                       const DropConfig& cfg);

// Same per-incidence layout with one probability everywhere.
std::vector<double> uniform_drop_probabilities(const Hypergraph& hg, double p);

struct MaskedStructure {
  std::vector<std::uint8_t> mask;
  Incidence incidence;
};

// Independent Bernoulli(1 − p) keep decision per incidence. Emptied
// hyperedges stay as zero columns.
MaskedStructure sample_view_structure(const Hypergraph& hg, const std::vector<double>& drop_probs, Rng& rng);

struct ViewOptions {
  bool prompt_view = true;  // false: view 1 uses the original text too
};

// View 1: prompted text; view 2: original text. Each gets an independent
// structure mask from drop_probs. original_features are the embeddings of the
// original texts (view 2's features), computed once by the caller.
std::pair<AugmentedView, AugmentedView> make_views(const Hypergraph& hg, const TextCorpus& corpus,
                                                   const EmbeddingProvider& provider, const Matrix& original_features,
                                                   const std::vector<double>& drop_probs, const PromptConfig& pcfg,
                                                   Rng& rng, const ViewOptions& options = {});

// Convenience form: embeds the corpus, scores cohesiveness on it, and applies
// semantic-aware drop with dcfg.
std::pair<AugmentedView, AugmentedView> make_views(const Hypergraph& hg, const TextCorpus& corpus,
                                                   const EmbeddingProvider& provider, const PromptConfig& pcfg,
                                                   const DropConfig& dcfg, Rng& rng);

}  // namespace tahg
