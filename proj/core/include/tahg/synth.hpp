#pragma once

#include <cstdint>

#include "tahg/dataset.hpp"

namespace tahg {

// Planted-partition text-attributed hypergraph. Nodes are split into
// contiguous blocks; each block has its own token pool. Intra-block
// hyperedges are drawn so that every node is covered at least once, and a few
// cross-block hyperedges add structural noise. Labels are block ids.
struct SynthParams {
  std::size_t num_nodes = 200;
  std::size_t blocks = 2;
  std::size_t edge_size = 4;          // k
  std::size_t intra_edges = 120;      // m_in
  std::size_t cross_edges = 12;       // m_cross
  std::size_t tokens_per_node = 20;   // T
  std::size_t vocab_per_block = 1600;
  std::size_t shared_vocab = 200;     // pool common to all blocks
  double shared_fraction = 0.25;      // share of each text drawn from it
  std::uint64_t seed = 0;

  // Throws InvalidParams.
  void validate() const;
};

Dataset generate_synthetic(const SynthParams& params);

}  // namespace tahg
