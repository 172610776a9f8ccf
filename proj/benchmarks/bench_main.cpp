#include <benchmark/benchmark.h>

#include "tahg/augment.hpp"
#include "tahg/objectives.hpp"
#include "tahg/synth.hpp"
#include "tahg/trainer.hpp"

namespace {

using namespace tahg;

Dataset fixture(std::size_t n) {
  SynthParams p;
  p.num_nodes = n;
  p.intra_edges = 3 * n / 5;
  p.cross_edges = 3 * n / 50;
  return generate_synthetic(p);
}

Matrix random_rows(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

void BM_TextEmbed(benchmark::State& state) {
  const auto ds = fixture(static_cast<std::size_t>(state.range(0)));
  const TextEncoder enc(TextEncoderConfig{}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(enc.embed_nodes(ds.corpus.texts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TextEmbed)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_HgnnForward(benchmark::State& state) {
  const auto ds = fixture(static_cast<std::size_t>(state.range(0)));
  const Matrix x = random_rows(static_cast<Eigen::Index>(ds.hypergraph.num_nodes()), 64, 2);
  Rng rng(3);
  const auto params = HgnnParams::init({64, 64, 64, 1}, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hgnn_forward(ds.hypergraph.incidence(), x, ds.hypergraph.weights(), params, false));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HgnnForward)->Arg(200)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_HgnnBackward(benchmark::State& state) {
  const auto ds = fixture(static_cast<std::size_t>(state.range(0)));
  const Matrix x = random_rows(static_cast<Eigen::Index>(ds.hypergraph.num_nodes()), 64, 2);
  Rng rng(3);
  const auto params = HgnnParams::init({64, 64, 64, 1}, rng);
  const auto out = hgnn_forward(ds.hypergraph.incidence(), x, ds.hypergraph.weights(), params);
  const Matrix g = random_rows(out.z_v.rows(), out.z_v.cols(), 4);
  for (auto _ : state) benchmark::DoNotOptimize(hgnn_backward(out, params, g, nullptr, false));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HgnnBackward)->Arg(200)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_InfoNceGradient(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix a = random_rows(n, 64, 5);
  const Matrix c = random_rows(n, 64, 6);
  for (auto _ : state) benchmark::DoNotOptimize(info_nce_gradient(a, c, 0.5));
  state.SetComplexityN(n);
}
BENCHMARK(BM_InfoNceGradient)->RangeMultiplier(4)->Range(64, 4096)->Complexity()->Unit(benchmark::kMicrosecond);

void BM_Cohesiveness(benchmark::State& state) {
  const auto ds = fixture(1000);
  const Matrix x = random_rows(1000, 64, 7);
  for (auto _ : state) benchmark::DoNotOptimize(cohesiveness_scores(ds.hypergraph, x));
}
BENCHMARK(BM_Cohesiveness)->Unit(benchmark::kMicrosecond);

void BM_SWalk(benchmark::State& state) {
  const auto ds = fixture(1000);
  const auto s = static_cast<std::size_t>(state.range(0));
  const auto adjacency = s_adjacency(ds.hypergraph, s);
  const WalkConfig cfg{s, 4};
  Rng rng(8);
  NodeId v = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s_walk(ds.hypergraph, adjacency, v, cfg, rng));
    v = (v + 1) % 1000;
  }
}
BENCHMARK(BM_SWalk)->DenseRange(1, 3);

void BM_CliqueReconstruction(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(9);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(8.0 / static_cast<double>(n))) pairs.emplace_back(u, v);
    }
  }
  const PairwiseGraph g(n, pairs);
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct_from_graph(g));
}
BENCHMARK(BM_CliqueReconstruction)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Stage2Epoch(benchmark::State& state) {
  const auto ds = fixture(200);
  RunConfig cfg;
  cfg.stage2.epochs = 1;
  const auto enc = initial_text_encoder(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(run_stage2(cfg, ds.hypergraph, ds.corpus, enc));
}
BENCHMARK(BM_Stage2Epoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
