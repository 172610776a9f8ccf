#include "tahg/augment.hpp"

#include <cmath>
#include <string>

#include "tahg/error.hpp"

namespace tahg {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

std::string render_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Prefix of at most n bytes that does not split a UTF-8 sequence.
std::string utf8_prefix(const std::string& s, std::size_t n) {
  if (s.size() <= n) return s;
  std::size_t cut = n;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut);
}

}  // namespace

void PromptConfig::validate() const {
  if (snippet_len < 1) fail(ErrorCode::InvalidConfig, "prompt snippet_len must be at least 1");
}

void DropConfig::validate() const {
  if (!(tau_drop > 0.0)) fail(ErrorCode::NonPositiveTemperature, "tau_drop must be positive");
}

std::string build_prompt(NodeId v, const Hypergraph& hg, const TextCorpus& corpus, const PromptConfig& cfg,
                         Rng& rng) {
  if (v >= hg.num_nodes() || v >= corpus.size()) fail(ErrorCode::NodeIdOutOfRange, "node " + std::to_string(v));
  cfg.validate();
  std::string out = corpus[v];
  auto section = [&out](const std::string& header, const std::string& body) {
    if (!out.empty()) out.push_back('\n');
    out += header;
    out.push_back(' ');
    out += body;
  };

  if (cfg.include_domain && !cfg.domain_text.empty()) section(cfg.domain_header, cfg.domain_text);

  if (cfg.include_topology) {
    std::string body = "degree " + render_number(hg.node_degree(v));
    auto edges = hg.edges_of(v);
    if (!edges.empty()) {
      body += "; incident hyperedge sizes";
      for (std::size_t i = 0; i < edges.size(); ++i) {
        body += i ? ", " : " ";
        body += std::to_string(hg.edge_degree(edges[i]));
      }
    }
    section(cfg.topology_header, body);
  }

  if (cfg.include_context && cfg.max_neighbor_snippets > 0) {
    auto neighbors = one_hop_neighbors(hg, v);
    const std::size_t take = std::min(cfg.max_neighbor_snippets, neighbors.size());
    // Partial Fisher–Yates: the first `take` slots become a uniform sample.
    for (std::size_t i = 0; i < take; ++i) {
      std::swap(neighbors[i], neighbors[i + rng.uniform_index(neighbors.size() - i)]);
    }
    std::string body;
    for (std::size_t i = 0; i < take; ++i) {
      const std::string snippet = utf8_prefix(corpus[neighbors[i]], cfg.snippet_len);
      if (snippet.empty()) continue;
      if (!body.empty()) body += " | ";
      body += snippet;
    }
    if (!body.empty()) section(cfg.context_header, body);
  }
  return out;
}

double cohesiveness(const Hypergraph& hg, const Matrix& features, EdgeId e, bool lenient) {
  if (e >= hg.num_edges()) fail(ErrorCode::HyperedgeIdOutOfRange, "hyperedge " + std::to_string(e));
  auto members = hg.members(e);
  const std::size_t k = members.size();
  if (k < 2) return 1.0;
  RowVector sum = RowVector::Zero(features.cols());
  double self = 0.0;
  for (NodeId v : members) {
    const double norm = features.row(v).norm();
    if (norm == 0.0) {
      if (!lenient) {
        fail(ErrorCode::ZeroFeatureRow, "node " + std::to_string(v) + " in hyperedge " + std::to_string(e));
      }
      continue;
    }
    RowVector u = features.row(v) / norm;
    self += u.squaredNorm();
    sum += u;
  }
  // Σ_{i<j} u_i·u_j = (|Σ u|² − Σ |u_i|²) / 2
  const double pair_sum = 0.5 * (sum.squaredNorm() - self);
  const double pairs = 0.5 * static_cast<double>(k) * static_cast<double>(k - 1);
  return pair_sum / pairs;
}

std::vector<double> cohesiveness_scores(const Hypergraph& hg, const Matrix& features, bool lenient) {
  if (static_cast<std::size_t>(features.rows()) != hg.num_nodes()) {
    fail(ErrorCode::DimensionMismatch, "feature rows differ from |V|");
  }
  std::vector<double> out(hg.num_edges());
  for (EdgeId e = 0; e < hg.num_edges(); ++e) out[e] = cohesiveness(hg, features, e, lenient);
  return out;
}

std::vector<double> drop_probabilities(const Hypergraph& hg, const std::vector<double>& scores,
                                       const DropConfig& cfg) {
  cfg.validate();
  if (scores.size() != hg.num_edges()) fail(ErrorCode::DimensionMismatch, "one score per hyperedge required");
  std::vector<double> out;
  out.reserve(hg.nnz());
  for (EdgeId e = 0; e < hg.num_edges(); ++e) {
    if (!std::isfinite(scores[e])) fail(ErrorCode::NonFiniteInput, "non-finite cohesiveness score");
    const double p = sigmoid(-(scores[e] - 0.5) / cfg.tau_drop);
    out.insert(out.end(), hg.edge_degree(e), p);
  }
  return out;
}

std::vector<double> uniform_drop_probabilities(const Hypergraph& hg, double p) {
  return std::vector<double>(hg.nnz(), p);
}

MaskedStructure sample_view_structure(const Hypergraph& hg, const std::vector<double>& drop_probs, Rng& rng) {
  if (drop_probs.size() != hg.nnz()) fail(ErrorCode::DimensionMismatch, "one probability per incidence required");
  MaskedStructure out;
  out.mask.resize(drop_probs.size());
  for (std::size_t k = 0; k < drop_probs.size(); ++k) out.mask[k] = rng.uniform01() >= drop_probs[k] ? 1 : 0;
  out.incidence = hg.incidence().masked(out.mask);
  return out;
}

std::pair<AugmentedView, AugmentedView> make_views(const Hypergraph& hg, const TextCorpus& corpus,
                                                   const EmbeddingProvider& provider, const Matrix& original_features,
                                                   const std::vector<double>& drop_probs, const PromptConfig& pcfg,
                                                   Rng& rng, const ViewOptions& options) {
  if (corpus.size() != hg.num_nodes()) fail(ErrorCode::DimensionMismatch, "corpus and hypergraph sizes differ");
  AugmentedView first;
  AugmentedView second;
  const bool any_section = pcfg.include_domain || pcfg.include_topology || pcfg.include_context;
  if (options.prompt_view && any_section && provider.reads_text()) {
    Rng prompt_rng = rng.split(1);
    std::vector<std::string> prompts(corpus.size());
    for (NodeId v = 0; v < corpus.size(); ++v) prompts[v] = build_prompt(v, hg, corpus, pcfg, prompt_rng);
    first.features = provider.embed_nodes(prompts);
  } else {
    first.features = original_features;
  }
  second.features = original_features;

  Rng mask_rng_1 = rng.split(2);
  Rng mask_rng_2 = rng.split(3);
  auto s1 = sample_view_structure(hg, drop_probs, mask_rng_1);
  auto s2 = sample_view_structure(hg, drop_probs, mask_rng_2);
  first.mask = std::move(s1.mask);
  first.incidence = std::move(s1.incidence);
  second.mask = std::move(s2.mask);
  second.incidence = std::move(s2.incidence);
  return {std::move(first), std::move(second)};
}

std::pair<AugmentedView, AugmentedView> make_views(const Hypergraph& hg, const TextCorpus& corpus,
                                                   const EmbeddingProvider& provider, const PromptConfig& pcfg,
                                                   const DropConfig& dcfg, Rng& rng) {
  const Matrix x = provider.embed_nodes(corpus.texts);
  const auto probs = drop_probabilities(hg, cohesiveness_scores(hg, x), dcfg);
  return make_views(hg, corpus, provider, x, probs, pcfg, rng);
}

}  // namespace tahg
