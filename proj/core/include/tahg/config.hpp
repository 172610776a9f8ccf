#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tahg/augment.hpp"
#include "tahg/objectives.hpp"
#include "tahg/stage1.hpp"
#include "tahg/text_encoder.hpp"

namespace tahg {

struct Stage2Config {
  std::size_t epochs = 200;
  double lr = 1e-3;
  double weight_decay = 0.0;
  InfoNceConfig temperatures;
  LossWeights weights{1.0, 4.0};  // lambda_e, lambda_s
  WalkConfig walk;
  double anchor_ratio = 30.0;  // r, percent of nodes
  DropConfig drop;
  std::size_t hidden_dim = 64;
  std::size_t output_dim = 64;
  std::size_t layers = 1;
};

// Switches for the component ablations.
struct AblationFlags {
  bool disable_stage1_pretrain = false;           // "w/o pre"
  bool random_drop_instead_of_semantic = false;   // "w/o shd"
  bool disable_subgraph_loss = false;             // "w/o s"
  bool disable_prompt = false;                    // "w/o prompt"
  bool disable_domain = false;                    // "w/o domain"
  bool disable_topology = false;                  // "w/o topology"
  bool disable_context = false;                   // "w/o context"

  // Short label such as "full" or "w/o pre+w/o s".
  std::string label() const;
};

struct RunConfig {
  std::uint64_t seed = 0;
  TextEncoderConfig encoder;
  Stage1Config stage1;  // stage1.seed is derived from `seed` at run time
  Stage2Config stage2;
  PromptConfig prompt;
  AblationFlags ablation;

  // Range checks across all blocks. Throws InvalidConfig and friends.
  void validate() const;
};

// Parses a TOML subset: `[section]` headers, `key = value` lines, `#`
// comments. Values are integers, floats, true/false, or double-quoted
// strings with \" \\ \n escapes. Unknown keys and sections are errors.
// Throws ParseError (with line number) or InvalidConfig.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Sets one dotted key such as "stage2.walk_len" from its textual value.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

// All dotted keys in canonical order.
std::vector<std::string> config_keys();

// Canonical rendering; parse_config(to_toml(c)) reproduces c exactly.
std::string to_toml(const RunConfig& cfg);

// FNV-1a of to_toml(cfg), rendered as 16 lowercase hex digits by hash_hex.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace tahg
