#include "tahg/synth.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tahg/error.hpp"
#include "tahg/rng.hpp"

namespace tahg {
namespace {

// Pronounceable, collision-free word for a global token id.
std::string token_word(std::size_t id) {
  static const char* consonants = "bdfgklmnprstvz";
  static const char* vowels = "aeiou";
  std::string w;
  do {
    w.push_back(consonants[id % 14]);
    id /= 14;
    w.push_back(vowels[id % 5]);
    id /= 5;
  } while (id > 0);
  return w;
}

}  // namespace

void SynthParams::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorCode::InvalidParams, msg); };
  if (blocks < 1) bad("blocks must be at least 1");
  if (num_nodes < blocks) bad("need at least one node per block");
  if (edge_size < 1) bad("edge_size must be at least 1");
  if (num_nodes / blocks < edge_size) bad("every block must hold at least edge_size nodes");
  if (tokens_per_node < 1) bad("tokens_per_node must be at least 1");
  if (vocab_per_block < 1) bad("vocab_per_block must be at least 1");
  if (shared_fraction < 0.0 || shared_fraction > 1.0) bad("shared_fraction must be in [0, 1]");
  if (shared_fraction > 0.0 && shared_vocab == 0) bad("shared_fraction > 0 needs a shared vocabulary");
  if (cross_edges > 0 && (blocks < 2 || edge_size < 2)) bad("cross-block hyperedges need 2+ blocks and size 2+");
  std::size_t cover = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t size = (num_nodes * (b + 1)) / blocks - (num_nodes * b) / blocks;
    cover += (size + edge_size - 1) / edge_size;
  }
  if (intra_edges < cover) {
    bad("intra_edges=" + std::to_string(intra_edges) + " cannot cover all nodes; need at least " +
        std::to_string(cover));
  }
}

Dataset generate_synthetic(const SynthParams& p) {
  p.validate();
  Rng rng(p.seed);
  std::vector<std::vector<NodeId>> members(p.blocks);
  std::vector<std::int32_t> block_of(p.num_nodes);
  for (std::size_t b = 0; b < p.blocks; ++b) {
    for (std::size_t v = (p.num_nodes * b) / p.blocks; v < (p.num_nodes * (b + 1)) / p.blocks; ++v) {
      members[b].push_back(static_cast<NodeId>(v));
      block_of[v] = static_cast<std::int32_t>(b);
    }
  }

  // k distinct members of one block, always including `must` when given.
  auto draw_intra = [&](std::size_t b, std::vector<NodeId> seedset) {
    const auto& pool = members[b];
    while (seedset.size() < p.edge_size) {
      const NodeId v = pool[rng.uniform_index(pool.size())];
      if (std::find(seedset.begin(), seedset.end(), v) == seedset.end()) seedset.push_back(v);
    }
    return seedset;
  };

  std::vector<std::vector<NodeId>> edges;
  // Cover: shuffle each block and chunk it; a short last chunk is topped up.
  for (std::size_t b = 0; b < p.blocks; ++b) {
    std::vector<NodeId> order = members[b];
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); i += p.edge_size) {
      const std::size_t stop = std::min(order.size(), i + p.edge_size);
      edges.push_back(draw_intra(b, std::vector<NodeId>(order.begin() + static_cast<std::ptrdiff_t>(i),
                                                        order.begin() + static_cast<std::ptrdiff_t>(stop))));
    }
  }
  for (std::size_t b = 0; edges.size() < p.intra_edges; b = (b + 1) % p.blocks) {
    edges.push_back(draw_intra(b, {}));
  }
  for (std::size_t c = 0; c < p.cross_edges; ++c) {
    std::vector<NodeId> e;
    while (true) {
      e.clear();
      while (e.size() < p.edge_size) {
        const auto v = static_cast<NodeId>(rng.uniform_index(p.num_nodes));
        if (std::find(e.begin(), e.end(), v) == e.end()) e.push_back(v);
      }
      const bool mixed = std::any_of(e.begin(), e.end(), [&](NodeId v) { return block_of[v] != block_of[e[0]]; });
      if (mixed) break;
    }
    edges.push_back(std::move(e));
  }
  for (auto& e : edges) std::sort(e.begin(), e.end());

  Dataset ds;
  ds.corpus.texts.resize(p.num_nodes);
  const std::size_t shared_base = p.blocks * p.vocab_per_block;
  for (std::size_t v = 0; v < p.num_nodes; ++v) {
    const auto b = static_cast<std::size_t>(block_of[v]);
    std::string text;
    for (std::size_t t = 0; t < p.tokens_per_node; ++t) {
      const bool shared = p.shared_fraction > 0.0 && rng.uniform01() < p.shared_fraction;
      const std::size_t id = shared ? shared_base + rng.uniform_index(p.shared_vocab)
                                    : b * p.vocab_per_block + rng.uniform_index(p.vocab_per_block);
      if (!text.empty()) text.push_back(' ');
      text += token_word(id);
    }
    ds.corpus.texts[v] = std::move(text);
  }
  ds.labels.labels = std::move(block_of);
  ds.labels.num_classes = static_cast<std::int32_t>(p.blocks);
  ds.hypergraph = build_hypergraph(p.num_nodes, edges);
  return ds;
}

}  // namespace tahg
