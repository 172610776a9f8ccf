#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tahg/corpus.hpp"
#include "tahg/types.hpp"

namespace tahg {

// Source of node feature rows. Stage 2 only ever sees this interface, so a
// trained TextEncoder and externally computed embeddings are interchangeable.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  // One row per text, in order. Frozen providers ignore the text content and
  // return their stored rows (texts.size() must equal the row count).
  virtual Matrix embed_nodes(const std::vector<std::string>& texts) const = 0;
  // False when the provider cannot see text, so prompt augmentation is a no-op.
  virtual bool reads_text() const = 0;
};

struct TextEncoderConfig {
  std::size_t feature_dim = 4096;  // hash buckets B
  std::size_t output_dim = 64;     // d
  std::size_t ngram_min = 1;
  std::size_t ngram_max = 2;
  std::uint64_t hash_seed = 0x7a4f1e2d3c5b6a09ULL;
};

// Sparse hashed n-gram bag; L2-normalized unless empty.
struct SparseBag {
  std::vector<std::uint32_t> index;  // ascending bucket ids
  std::vector<double> value;

  bool empty() const { return index.empty(); }
};

std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed);

// Built-in text encoder: hashed word n-gram bag followed by a trainable
// affine projection, x = bag · P + b.
class TextEncoder final : public EmbeddingProvider {
 public:
  // P and b drawn uniform(-1/sqrt(B), 1/sqrt(B)) from init_seed.
  TextEncoder(TextEncoderConfig config, std::uint64_t init_seed);

  const TextEncoderConfig& config() const { return config_; }
  std::size_t dim() const override { return config_.output_dim; }
  bool reads_text() const override { return true; }

  SparseBag bag(std::string_view text) const;
  RowVector embed_bag(const SparseBag& bag) const;
  RowVector embed_text(std::string_view text) const { return embed_bag(bag(text)); }
  Matrix embed_bags(const std::vector<SparseBag>& bags) const;
  Matrix embed_nodes(const std::vector<std::string>& texts) const override;

  Matrix& projection() { return projection_; }
  const Matrix& projection() const { return projection_; }
  RowVector& bias() { return bias_; }
  const RowVector& bias() const { return bias_; }

  // FNV-1a over the raw parameter bytes; used to prove an encoder was not mutated.
  std::uint64_t checksum() const;

  // Block "TAHGTXT1": u64 B, u64 d, u64 ngram_min, u64 ngram_max, u64 hash_seed,
  // B*d f64 projection (row-major), d f64 bias.
  void write(std::ostream& out) const;
  static TextEncoder read(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static TextEncoder load(const std::filesystem::path& path);

 private:
  TextEncoderConfig config_;
  Matrix projection_;
  RowVector bias_;
};

// Frozen |V| x d feature matrix, e.g. outputs of an external language model.
class PrecomputedEmbeddings final : public EmbeddingProvider {
 public:
  explicit PrecomputedEmbeddings(Matrix features) : features_(std::move(features)) {}

  std::size_t dim() const override { return static_cast<std::size_t>(features_.cols()); }
  bool reads_text() const override { return false; }
  Matrix embed_nodes(const std::vector<std::string>& texts) const override;
  const Matrix& features() const { return features_; }

 private:
  Matrix features_;
};

// Embedding file: magic "TAHGEMB1", u64 rows, u64 cols, rows*cols
// little-endian f32 in row-major order.
void write_embeddings(const Matrix& m, std::ostream& out);
Matrix read_embeddings(std::istream& in);
void save_embeddings(const Matrix& m, const std::filesystem::path& path);
Matrix load_embeddings(const std::filesystem::path& path);

}  // namespace tahg
