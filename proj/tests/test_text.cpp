#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <string>

#include "support.hpp"
#include "tahg/stage1.hpp"
#include "tahg/synth.hpp"
#include "tahg/text_encoder.hpp"

namespace tahg {
namespace {

TextEncoderConfig small_encoder(std::size_t buckets = 64, std::size_t dim = 8) {
  TextEncoderConfig c;
  c.feature_dim = buckets;
  c.output_dim = dim;
  return c;
}

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("Hello, World! x2-y"), (std::vector<std::string>{"hello", "world", "x2", "y"}));
  EXPECT_TRUE(tokenize("  ,;  ").empty());
  EXPECT_EQ(tokenize("caf\xc3\xa9 ok"), (std::vector<std::string>{"caf\xc3\xa9", "ok"}));
}

TEST(TextEncoder, EmptyTextGivesBias) {
  const TextEncoder enc(small_encoder(), 7);
  const RowVector out = enc.embed_text("");
  EXPECT_EQ(out, enc.bias());
  EXPECT_TRUE(enc.bag("").empty());
}

TEST(TextEncoder, Deterministic) {
  const TextEncoder a(small_encoder(), 7);
  const TextEncoder b(small_encoder(), 7);
  const std::string t = "graph neural networks on hypergraphs";
  EXPECT_EQ(a.embed_text(t), a.embed_text(t));
  EXPECT_EQ(a.embed_text(t), b.embed_text(t));
  EXPECT_EQ(a.checksum(), b.checksum());
  const TextEncoder c(small_encoder(), 8);
  EXPECT_NE(a.checksum(), c.checksum());
}

TEST(TextEncoder, BagIsUnitNorm) {
  const TextEncoder enc(small_encoder(), 1);
  const auto bag = enc.bag("the cat sat on the mat the end");
  double sq = 0.0;
  for (double v : bag.value) sq += v * v;
  EXPECT_NEAR(sq, 1.0, 1e-12);
  EXPECT_TRUE(std::is_sorted(bag.index.begin(), bag.index.end()));
}

// Distinct word n-grams of a text for n in [1, 2], enumerated directly.
std::set<std::string> ngrams(const std::string& text) {
  const auto toks = tokenize(text);
  std::set<std::string> out(toks.begin(), toks.end());
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) out.insert(toks[i] + " " + toks[i + 1]);
  return out;
}

TEST(TextEncoder, DisjointNgramsGiveOrthogonalBags) {
  const TextEncoder enc(small_encoder(1u << 20, 4), 3);
  const std::string a = "alpha beta gamma delta";
  const std::string b = "epsilon zeta eta theta iota";
  const auto ba = enc.bag(a);
  const auto bb = enc.bag(b);
  // At 2^20 buckets these few n-grams land in distinct buckets.
  EXPECT_EQ(ba.index.size(), ngrams(a).size());
  EXPECT_EQ(bb.index.size(), ngrams(b).size());
  double dot = 0.0;
  for (std::size_t i = 0; i < ba.index.size(); ++i) {
    for (std::size_t j = 0; j < bb.index.size(); ++j) {
      if (ba.index[i] == bb.index[j]) dot += ba.value[i] * bb.value[j];
    }
  }
  EXPECT_EQ(dot, 0.0);
}

TEST(TextEncoder, WriteReadRoundTrip) {
  const TextEncoder enc(small_encoder(), 5);
  std::stringstream ss;
  enc.write(ss);
  const auto back = TextEncoder::read(ss);
  EXPECT_EQ(back.checksum(), enc.checksum());
  EXPECT_EQ(back.embed_text("some words here"), enc.embed_text("some words here"));
}

TEST(Embeddings, FileRoundTripAndFrozenProvider) {
  Rng rng(2);
  const Matrix m = test::random_matrix(5, 3, rng);
  std::stringstream ss;
  write_embeddings(m, ss);
  const Matrix back = read_embeddings(ss);
  ASSERT_EQ(back.rows(), 5);
  ASSERT_EQ(back.cols(), 3);
  for (Eigen::Index i = 0; i < 5; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_EQ(back(i, j), static_cast<double>(static_cast<float>(m(i, j))));
  }
  const PrecomputedEmbeddings frozen(back);
  EXPECT_FALSE(frozen.reads_text());
  EXPECT_EQ(frozen.embed_nodes(std::vector<std::string>(5)), back);
}

TEST(Pools, IdenticalNeighborsGiveThatVector) {
  const auto hg = build_hypergraph(5, {{0, 1, 2}, {3, 4}});
  Matrix x(5, 2);
  x << 9, 9, 1, 2, 1, 2, 5, 6, 7, 8;
  const auto p = positive_negative_pools(hg, x, 0);
  EXPECT_EQ(p.positive, (RowVector(2) << 1, 2).finished());
}

TEST(Pools, FourNodeNegativeMean) {
  const auto hg = build_hypergraph(4, {{0, 1}, {2, 3}});
  Matrix x(4, 2);
  x << 1, 0, 0, 1, 2, 4, 6, 8;
  const auto p = positive_negative_pools(hg, x, 0);
  EXPECT_EQ(p.positive, x.row(1));
  EXPECT_EQ(p.negative, RowVector((x.row(2) + x.row(3)) / 2.0));
  // The literal set V \ N(v) keeps the anchor.
  const auto strict = positive_negative_pools(hg, x, 0, true);
  EXPECT_EQ(strict.negative, RowVector((x.row(0) + x.row(2) + x.row(3)) / 3.0));
}

TEST(Pools, Errors) {
  const auto hg = build_hypergraph(3, {{0, 1, 2}});
  const Matrix x = Matrix::Ones(4, 2);
  const auto isolated = build_hypergraph(4, {{0, 1}, {1, 2}});
  EXPECT_TAHG_ERROR(positive_negative_pools(isolated, x, 3), ErrorCode::NoPositivePool);
  EXPECT_TAHG_ERROR(positive_negative_pools(hg, Matrix::Ones(3, 2), 0), ErrorCode::NoNegativePool);
}

TEST(Pools, SubtractionMatchesDirectMean) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto hg = test::random_hypergraph(30, 12, 2, 4, rng);
    const Matrix x = test::random_matrix(30, 6, rng);
    const auto all = compute_pools(hg, x);
    for (NodeId v = 0; v < 30; ++v) {
      const auto nbrs = one_hop_neighbors(hg, v);
      std::vector<bool> in_pos(30, false);
      for (NodeId u : nbrs) in_pos[u] = true;
      RowVector pos = RowVector::Zero(6);
      RowVector neg = RowVector::Zero(6);
      std::size_t npos = 0, nneg = 0;
      for (NodeId u = 0; u < 30; ++u) {
        if (in_pos[u]) {
          pos += x.row(u);
          ++npos;
        } else if (u != v) {
          neg += x.row(u);
          ++nneg;
        }
      }
      const bool eligible = npos > 0 && nneg > 0;
      ASSERT_EQ(all.eligible[v] != 0, eligible);
      if (!eligible) continue;
      pos /= static_cast<double>(npos);
      neg /= static_cast<double>(nneg);
      const auto p = positive_negative_pools(hg, x, v);
      EXPECT_LE((p.positive - pos).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((p.negative - neg).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((all.positive.row(v) - pos).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((all.negative.row(v) - neg).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Triplet, MarginSatisfied) {
  TripletBatch b;
  b.anchor = (RowVector(2) << 1, 0).finished();
  b.positive = (RowVector(2) << 2, 0).finished();
  b.negative = (RowVector(2) << 0, 3).finished();
  EXPECT_DOUBLE_EQ(triplet_loss(b), 0.0);
}

TEST(Triplet, EqualSimilaritiesGiveMargin) {
  Rng rng(1);
  TripletBatch b;
  b.anchor = test::random_matrix(1, 5, rng).row(0);
  b.positive = test::random_matrix(1, 5, rng).row(0);
  b.negative = b.positive;
  b.margin = 0.5;
  EXPECT_NEAR(triplet_loss(b), 0.5, 1e-15);
}

TEST(Triplet, MatchesFormulaAndBounds) {
  Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    TripletBatch b;
    b.anchor = test::random_matrix(1, 4, rng).row(0);
    b.positive = test::random_matrix(1, 4, rng).row(0);
    b.negative = test::random_matrix(1, 4, rng).row(0);
    b.margin = 0.5;
    const double expect = std::max(
        0.0, test::brute_cosine(b.anchor, b.negative) - test::brute_cosine(b.anchor, b.positive) + b.margin);
    const double got = triplet_loss(b);
    EXPECT_NEAR(got, expect, 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 2.0 + b.margin);
  }
}

TEST(Triplet, ZeroVector) {
  TripletBatch b;
  b.anchor = RowVector::Zero(3);
  b.positive = RowVector::Ones(3);
  b.negative = RowVector::Ones(3);
  EXPECT_TAHG_ERROR(triplet_loss(b), ErrorCode::ZeroVector);
}

Dataset ten_node_fixture() {
  SynthParams sp;
  sp.num_nodes = 10;
  sp.edge_size = 3;
  sp.intra_edges = 6;
  sp.cross_edges = 2;
  sp.vocab_per_block = 30;
  sp.shared_vocab = 10;
  sp.seed = 3;
  return generate_synthetic(sp);
}

TEST(Stage1, GradientMatchesFiniteDifferences) {
  const auto ds = ten_node_fixture();
  TextEncoder enc(small_encoder(32, 6), 9);
  std::vector<SparseBag> bags;
  for (const auto& t : ds.corpus.texts) bags.push_back(enc.bag(t));
  std::vector<NodeId> anchors(10);
  for (NodeId v = 0; v < 10; ++v) anchors[v] = v;
  const auto obj = stage1_objective(enc, ds.hypergraph, bags, anchors, 0.5, false);
  ASSERT_GT(obj.counted, 0u);
  ASSERT_GT(obj.loss, 0.0);

  std::vector<double*> params;
  std::vector<double> analytic;
  for (Eigen::Index i = 0; i < enc.projection().size(); ++i) {
    params.push_back(enc.projection().data() + i);
    analytic.push_back(obj.d_projection.data()[i]);
  }
  for (Eigen::Index i = 0; i < enc.bias().size(); ++i) {
    params.push_back(enc.bias().data() + i);
    analytic.push_back(obj.d_bias[i]);
  }
  const double worst = test::fd_worst_relative_error(params, analytic, [&] {
    return stage1_objective(enc, ds.hypergraph, bags, anchors, 0.5, false, nullptr, false).loss;
  });
  EXPECT_LE(worst, 1e-4);
}

TEST(Stage1, ZeroEpochsLeavesParameters) {
  const auto ds = ten_node_fixture();
  const TextEncoder enc(small_encoder(), 4);
  Stage1Config cfg;
  cfg.epochs = 0;
  const auto out = pretrain_text_encoder(enc, ds.hypergraph, ds.corpus, cfg);
  EXPECT_EQ(out.encoder.checksum(), enc.checksum());
  EXPECT_TRUE(out.loss_trace.empty());
}

TEST(Stage1, LossDecreasesOnTwoBlockSynthetic) {
  SynthParams sp;
  sp.seed = 1;
  const auto ds = generate_synthetic(sp);
  const TextEncoder enc(TextEncoderConfig{}, 2);
  Stage1Config cfg;
  cfg.epochs = 5;
  const auto out = pretrain_text_encoder(enc, ds.hypergraph, ds.corpus, cfg);
  ASSERT_EQ(out.loss_trace.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LT(out.loss_trace[i], out.loss_trace[i - 1]) << "epoch " << i;
}

TEST(Stage1, Deterministic) {
  const auto ds = ten_node_fixture();
  const TextEncoder enc(small_encoder(), 4);
  Stage1Config cfg;
  cfg.epochs = 3;
  cfg.seed = 12;
  const auto a = pretrain_text_encoder(enc, ds.hypergraph, ds.corpus, cfg);
  const auto b = pretrain_text_encoder(enc, ds.hypergraph, ds.corpus, cfg);
  EXPECT_EQ(a.encoder.checksum(), b.encoder.checksum());
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Stage1, NoEligibleNodes) {
  const auto hg = build_hypergraph(3, {{0, 1, 2}});
  TextCorpus corpus{{"a", "b", "c"}};
  Stage1Config cfg;
  cfg.epochs = 1;
  EXPECT_TAHG_ERROR(pretrain_text_encoder(TextEncoder(small_encoder(), 1), hg, corpus, cfg),
                    ErrorCode::NoEligibleNodes);
}

}  // namespace
}  // namespace tahg
