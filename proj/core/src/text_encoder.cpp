#include "tahg/text_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "binary_io.hpp"
#include "tahg/error.hpp"
#include "tahg/rng.hpp"

namespace tahg {

std::uint64_t hash_bytes(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return Rng::mix(h);
}

TextEncoder::TextEncoder(TextEncoderConfig config, std::uint64_t init_seed) : config_(config) {
  if (config_.feature_dim == 0 || config_.output_dim == 0) {
    fail(ErrorCode::InvalidConfig, "text encoder dimensions must be positive");
  }
  if (config_.ngram_min == 0 || config_.ngram_min > config_.ngram_max) {
    fail(ErrorCode::InvalidConfig, "ngram range must satisfy 1 <= min <= max");
  }
  Rng rng(init_seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config_.feature_dim));
  projection_.resize(static_cast<Eigen::Index>(config_.feature_dim), static_cast<Eigen::Index>(config_.output_dim));
  for (Eigen::Index i = 0; i < projection_.size(); ++i) projection_.data()[i] = rng.uniform(-bound, bound);
  bias_.resize(static_cast<Eigen::Index>(config_.output_dim));
  for (Eigen::Index i = 0; i < bias_.size(); ++i) bias_[i] = rng.uniform(-bound, bound);
}

SparseBag TextEncoder::bag(std::string_view text) const {
  const auto tokens = tokenize(text);
  std::map<std::uint32_t, double> counts;
  std::string gram;
  for (std::size_t n = config_.ngram_min; n <= config_.ngram_max; ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      gram.clear();
      for (std::size_t k = 0; k < n; ++k) {
        if (k) gram.push_back(' ');
        gram += tokens[i + k];
      }
      const auto bucket = static_cast<std::uint32_t>(hash_bytes(gram, config_.hash_seed) % config_.feature_dim);
      counts[bucket] += 1.0;
    }
  }
  SparseBag out;
  double norm2 = 0.0;
  for (const auto& [k, c] : counts) norm2 += c * c;
  const double inv = norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : 0.0;
  out.index.reserve(counts.size());
  out.value.reserve(counts.size());
  for (const auto& [k, c] : counts) {
    out.index.push_back(k);
    out.value.push_back(c * inv);
  }
  return out;
}

RowVector TextEncoder::embed_bag(const SparseBag& bag) const {
  RowVector x = bias_;
  for (std::size_t k = 0; k < bag.index.size(); ++k) x.noalias() += bag.value[k] * projection_.row(bag.index[k]);
  return x;
}

Matrix TextEncoder::embed_bags(const std::vector<SparseBag>& bags) const {
  Matrix out(static_cast<Eigen::Index>(bags.size()), bias_.size());
  for (std::size_t i = 0; i < bags.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = embed_bag(bags[i]);
  return out;
}

Matrix TextEncoder::embed_nodes(const std::vector<std::string>& texts) const {
  Matrix out(static_cast<Eigen::Index>(texts.size()), bias_.size());
  for (std::size_t i = 0; i < texts.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = embed_text(texts[i]);
  return out;
}

std::uint64_t TextEncoder::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const double* data, Eigen::Index n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n) * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  feed(projection_.data(), projection_.size());
  feed(bias_.data(), bias_.size());
  return h;
}

void TextEncoder::write(std::ostream& out) const {
  io::write_magic(out, "TAHGTXT1");
  io::write_u64(out, config_.feature_dim);
  io::write_u64(out, config_.output_dim);
  io::write_u64(out, config_.ngram_min);
  io::write_u64(out, config_.ngram_max);
  io::write_u64(out, config_.hash_seed);
  for (Eigen::Index i = 0; i < projection_.size(); ++i) io::write_f64(out, projection_.data()[i]);
  for (Eigen::Index i = 0; i < bias_.size(); ++i) io::write_f64(out, bias_[i]);
}

TextEncoder TextEncoder::read(std::istream& in) {
  io::expect_magic(in, "TAHGTXT1");
  TextEncoderConfig cfg;
  cfg.feature_dim = io::read_u64(in);
  cfg.output_dim = io::read_u64(in);
  cfg.ngram_min = io::read_u64(in);
  cfg.ngram_max = io::read_u64(in);
  cfg.hash_seed = io::read_u64(in);
  if (cfg.feature_dim > (1u << 24) || cfg.output_dim > (1u << 16)) {
    fail(ErrorCode::BadFormat, "implausible text encoder dimensions");
  }
  TextEncoder enc(cfg, 0);
  for (Eigen::Index i = 0; i < enc.projection_.size(); ++i) enc.projection_.data()[i] = io::read_f64(in);
  for (Eigen::Index i = 0; i < enc.bias_.size(); ++i) enc.bias_[i] = io::read_f64(in);
  return enc;
}

void TextEncoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write(out);
}

TextEncoder TextEncoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return read(in);
}

Matrix PrecomputedEmbeddings::embed_nodes(const std::vector<std::string>& texts) const {
  if (static_cast<Eigen::Index>(texts.size()) != features_.rows()) {
    fail(ErrorCode::DimensionMismatch, "precomputed embeddings have " + std::to_string(features_.rows()) +
                                           " rows but " + std::to_string(texts.size()) + " texts were given");
  }
  return features_;
}

void write_embeddings(const Matrix& m, std::ostream& out) {
  io::write_magic(out, "TAHGEMB1");
  io::write_u64(out, static_cast<std::uint64_t>(m.rows()));
  io::write_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) io::write_f32(out, static_cast<float>(m.data()[i]));
}

Matrix read_embeddings(std::istream& in) {
  io::expect_magic(in, "TAHGEMB1");
  const auto rows = io::read_u64(in);
  const auto cols = io::read_u64(in);
  if (rows > (1ULL << 31) || cols > (1ULL << 20)) fail(ErrorCode::BadFormat, "implausible embedding dimensions");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const float x = io::read_f32(in);
    if (!std::isfinite(x)) fail(ErrorCode::NonFiniteInput, "embedding file contains NaN/Inf");
    m.data()[i] = x;
  }
  return m;
}

void save_embeddings(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_embeddings(m, out);
}

Matrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return read_embeddings(in);
}

}  // namespace tahg
