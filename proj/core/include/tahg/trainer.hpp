#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tahg/augment.hpp"
#include "tahg/config.hpp"
#include "tahg/dataset.hpp"
#include "tahg/hgnn.hpp"
#include "tahg/optim.hpp"
#include "tahg/stage1.hpp"
#include "tahg/text_encoder.hpp"

namespace tahg {

// Independent seeds for each consumer of randomness in a run.
enum class SeedStream : std::uint64_t { TextInit = 1, Stage1 = 2, HgnnInit = 3, Stage2 = 4, Eval = 5 };
std::uint64_t derive_seed(std::uint64_t run_seed, SeedStream stream, std::uint64_t index = 0);

// Text encoder at its seeded initialization.
TextEncoder initial_text_encoder(const RunConfig& cfg);

// Stage 1, or the untouched initialization when disable_stage1_pretrain.
Stage1Result run_stage1(const RunConfig& cfg, const Hypergraph& hg, const TextCorpus& corpus);

struct LossRecord {
  std::size_t epoch = 0;
  double l_n = 0.0;
  double l_e = 0.0;
  double l_s = 0.0;
  double total = 0.0;
};

// Everything needed to continue stage 2 exactly where it stopped.
struct Stage2State {
  HgnnParams params;
  Adam adam;
  std::size_t epoch = 0;  // epochs completed
};

struct Stage2Result {
  Stage2State state;
  std::vector<LossRecord> trace;
  double mean_subgraph_edges = 0.0;  // averaged over all sampled walks
};

struct Stage2Objective {
  double l_n = 0.0;
  double l_e = 0.0;
  double l_s = 0.0;
  double total = 0.0;
  HgnnParams grads;  // empty unless requested
};

// L = L_n + λ_e L_e + λ_s L_s on two fixed views and fixed subgraph samples
// (an empty sample list drops L_s). weights are the hyperedge weights.
Stage2Objective stage2_objective(const AugmentedView& view1, const AugmentedView& view2,
                                 std::span<const SubgraphSample> samples, const HgnnParams& params,
                                 std::span<const double> weights, const Stage2Config& cfg, bool want_gradient);

// Drop probabilities for the configured augmentation: semantic-aware, or a
// uniform probability equal to the mean semantic one under the "w/o shd"
// ablation.
std::vector<double> augmentation_drop_probabilities(const RunConfig& cfg, const Hypergraph& hg,
                                                    const Matrix& features);

// Nodes used as subgraph centers: the top r% by degree, minus isolated nodes.
std::vector<NodeId> subgraph_anchors(const RunConfig& cfg, const Hypergraph& hg);

PromptConfig effective_prompt(const RunConfig& cfg);

// Stage 2 with the text side frozen behind `provider`. Each epoch draws two
// views and one walk per anchor from a per-epoch seed, so resuming from a
// saved state continues bit-identically. Throws NonFiniteLoss.
Stage2Result run_stage2(const RunConfig& cfg, const Hypergraph& hg, const TextCorpus& corpus,
                        const EmbeddingProvider& provider, const Stage2State* resume = nullptr);

// Inference on the unaugmented hypergraph.
struct NodeEmbeddings {
  Matrix nodes;
  Matrix edges;
};
NodeEmbeddings embed_nodes(const Hypergraph& hg, const TextCorpus& corpus, const EmbeddingProvider& provider,
                           const HgnnParams& params);

// CSV with header epoch,L_n,L_e,L_s,L. Throws ParseError on read.
void write_loss_trace(const std::vector<LossRecord>& trace, std::ostream& out);
std::vector<LossRecord> read_loss_trace(std::istream& in);

// Checkpoint file: magic "TAHGCKP1", u64 epoch, u64 config hash, u8 has-text,
// the HGNN block, the text-encoder block when present, the Adam block.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::optional<TextEncoder> encoder;
  Stage2State state;
};
void write_checkpoint(const Checkpoint& ckpt, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in, const AdamConfig& adam_config);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path, const AdamConfig& adam_config);

AdamConfig stage2_adam_config(const Stage2Config& cfg);

// Both stages end to end with the built-in text encoder.
struct PipelineResult {
  Stage1Result stage1;
  Stage2Result stage2;
  NodeEmbeddings embeddings;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
};
PipelineResult run_pipeline(const RunConfig& cfg, const Dataset& ds);

}  // namespace tahg
