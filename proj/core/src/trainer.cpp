#include "tahg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "binary_io.hpp"
#include "tahg/error.hpp"
#include "tahg/objectives.hpp"

namespace tahg {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string render(double x) {
  std::ostringstream ss;
  ss.precision(17);
  ss << x;
  return ss.str();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t run_seed, SeedStream stream, std::uint64_t index) {
  return Rng::mix(Rng::mix(run_seed ^ Rng::mix(static_cast<std::uint64_t>(stream))) + index);
}

TextEncoder initial_text_encoder(const RunConfig& cfg) {
  return TextEncoder(cfg.encoder, derive_seed(cfg.seed, SeedStream::TextInit));
}

Stage1Result run_stage1(const RunConfig& cfg, const Hypergraph& hg, const TextCorpus& corpus) {
  cfg.validate();
  TextEncoder enc = initial_text_encoder(cfg);
  if (cfg.ablation.disable_stage1_pretrain) return Stage1Result{std::move(enc), {}, 0.0};
  Stage1Config s1 = cfg.stage1;
  s1.seed = derive_seed(cfg.seed, SeedStream::Stage1);
  return pretrain_text_encoder(std::move(enc), hg, corpus, s1);
}

Stage2Objective stage2_objective(const AugmentedView& view1, const AugmentedView& view2,
                                 std::span<const SubgraphSample> samples, const HgnnParams& params,
                                 std::span<const double> weights, const Stage2Config& cfg, bool want_gradient) {
  const auto out1 = hgnn_forward(view1.incidence, view1.features, weights, params, want_gradient);
  const auto out2 = hgnn_forward(view2.incidence, view2.features, weights, params, want_gradient);
  const auto& tau = cfg.temperatures;
  Stage2Objective obj;
  if (!want_gradient) {
    obj.l_n = node_loss(out1.z_v, out2.z_v, tau.tau_n);
    obj.l_e = hyperedge_loss(out1.z_e, out2.z_e, tau.tau_e);
    if (!samples.empty()) obj.l_s = subgraph_loss(view1, view2, samples, params, tau.tau_s, weights).loss;
    obj.total = total_loss(obj.l_n, obj.l_e, obj.l_s, cfg.weights);
    return obj;
  }

  const auto node = symmetric_info_nce(out1.z_v, out2.z_v, tau.tau_n);
  const auto edge = symmetric_info_nce(out1.z_e, out2.z_e, tau.tau_e);
  obj.l_n = node.loss;
  obj.l_e = edge.loss;
  const Matrix d_ze1 = cfg.weights.lambda_e * edge.d_first;
  const Matrix d_ze2 = cfg.weights.lambda_e * edge.d_second;
  obj.grads = hgnn_backward(out1, params, node.d_first, &d_ze1, false).params;
  obj.grads.add_scaled(hgnn_backward(out2, params, node.d_second, &d_ze2, false).params, 1.0);
  if (!samples.empty()) {
    HgnnParams sub = params.zeros_like();
    obj.l_s = subgraph_loss(view1, view2, samples, params, tau.tau_s, weights, &sub).loss;
    obj.grads.add_scaled(sub, cfg.weights.lambda_s);
  }
  obj.total = total_loss(obj.l_n, obj.l_e, obj.l_s, cfg.weights);
  return obj;
}

std::vector<double> augmentation_drop_probabilities(const RunConfig& cfg, const Hypergraph& hg,
                                                    const Matrix& features) {
  auto probs = drop_probabilities(hg, cohesiveness_scores(hg, features, true), cfg.stage2.drop);
  if (cfg.ablation.random_drop_instead_of_semantic && !probs.empty()) {
    const double mean = std::accumulate(probs.begin(), probs.end(), 0.0) / static_cast<double>(probs.size());
    probs = uniform_drop_probabilities(hg, mean);
  }
  return probs;
}

std::vector<NodeId> subgraph_anchors(const RunConfig& cfg, const Hypergraph& hg) {
  std::vector<NodeId> out;
  for (NodeId v : select_anchor_nodes(hg, cfg.stage2.anchor_ratio)) {
    if (!hg.edges_of(v).empty()) out.push_back(v);
  }
  return out;
}

PromptConfig effective_prompt(const RunConfig& cfg) {
  PromptConfig p = cfg.prompt;
  p.include_domain = p.include_domain && !cfg.ablation.disable_domain;
  p.include_topology = p.include_topology && !cfg.ablation.disable_topology;
  p.include_context = p.include_context && !cfg.ablation.disable_context;
  return p;
}

AdamConfig stage2_adam_config(const Stage2Config& cfg) {
  AdamConfig a;
  a.lr = cfg.lr;
  a.weight_decay = cfg.weight_decay;
  return a;
}

Stage2Result run_stage2(const RunConfig& cfg, const Hypergraph& hg, const TextCorpus& corpus,
                        const EmbeddingProvider& provider, const Stage2State* resume) {
  cfg.validate();
  if (corpus.size() != hg.num_nodes()) fail(ErrorCode::DimensionMismatch, "corpus and hypergraph sizes differ");
  const auto& s2 = cfg.stage2;

  Stage2Result result;
  if (resume) {
    result.state = *resume;
  } else {
    Rng init_rng(derive_seed(cfg.seed, SeedStream::HgnnInit));
    result.state.params = HgnnParams::init({provider.dim(), s2.hidden_dim, s2.output_dim, s2.layers}, init_rng);
    result.state.adam = Adam(stage2_adam_config(s2));
  }
  if (result.state.epoch >= s2.epochs) return result;

  const Matrix x = provider.embed_nodes(corpus.texts);
  const auto probs = augmentation_drop_probabilities(cfg, hg, x);
  const PromptConfig prompt = effective_prompt(cfg);
  const ViewOptions view_options{!cfg.ablation.disable_prompt};
  const bool use_subgraphs = !cfg.ablation.disable_subgraph_loss;
  const auto anchors = use_subgraphs ? subgraph_anchors(cfg, hg) : std::vector<NodeId>{};
  const auto adjacency = use_subgraphs ? s_adjacency(hg, s2.walk.s) : SAdjacency{};

  std::size_t walks = 0;
  std::size_t walk_edges = 0;
  auto& state = result.state;
  for (; state.epoch < s2.epochs; ++state.epoch) {
    Rng rng(derive_seed(cfg.seed, SeedStream::Stage2, state.epoch));
    const auto [view1, view2] = make_views(hg, corpus, provider, x, probs, prompt, rng, view_options);
    std::vector<SubgraphSample> samples;
    samples.reserve(anchors.size());
    for (NodeId v : anchors) {
      samples.push_back(s_walk(hg, adjacency, v, s2.walk, rng));
      walk_edges += samples.back().hyperedges.size();
      ++walks;
    }

    auto obj = stage2_objective(view1, view2, samples, state.params, hg.weights(), s2, true);
    if (!std::isfinite(obj.total)) {
      fail(ErrorCode::NonFiniteLoss, "stage-2 loss is not finite at epoch " + std::to_string(state.epoch) +
                                         ": L_n=" + render(obj.l_n) + " L_e=" + render(obj.l_e) +
                                         " L_s=" + render(obj.l_s));
    }
    result.trace.push_back({state.epoch, obj.l_n, obj.l_e, obj.l_s, obj.total});

    std::vector<double*> grad_blocks;
    obj.grads.for_each_block([&grad_blocks](std::size_t, double* d, std::size_t) { grad_blocks.push_back(d); });
    state.adam.begin_step();
    state.params.for_each_block([&](std::size_t slot, double* d, std::size_t n) {
      state.adam.apply(slot, d, grad_blocks[slot], n);
    });
    if (!state.params.all_finite()) {
      fail(ErrorCode::NonFiniteLoss, "stage-2 parameters became non-finite at epoch " + std::to_string(state.epoch));
    }
  }
  result.mean_subgraph_edges = walks ? static_cast<double>(walk_edges) / static_cast<double>(walks) : 0.0;
  return result;
}

NodeEmbeddings embed_nodes(const Hypergraph& hg, const TextCorpus& corpus, const EmbeddingProvider& provider,
                           const HgnnParams& params) {
  const Matrix x = provider.embed_nodes(corpus.texts);
  auto out = hgnn_forward(hg.incidence(), x, hg.weights(), params, false);
  return {std::move(out.z_v), std::move(out.z_e)};
}

void write_loss_trace(const std::vector<LossRecord>& trace, std::ostream& out) {
  out << "epoch,L_n,L_e,L_s,L\n";
  for (const auto& r : trace) {
    out << r.epoch << ',' << render(r.l_n) << ',' << render(r.l_e) << ',' << render(r.l_s) << ','
        << render(r.total) << '\n';
  }
}

std::vector<LossRecord> read_loss_trace(std::istream& in) {
  std::vector<LossRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::istringstream row(line);
    std::string field[5];
    for (auto& f : field) std::getline(row, f, ',');
    try {
      out.push_back({std::stoull(field[0]), std::stod(field[1]), std::stod(field[2]), std::stod(field[3]),
                     std::stod(field[4])});
    } catch (const std::exception&) {
      fail(ErrorCode::ParseError, "loss trace line " + std::to_string(lineno) + ": malformed row");
    }
  }
  return out;
}

void write_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  io::write_magic(out, "TAHGCKP1");
  io::write_u64(out, ckpt.state.epoch);
  io::write_u64(out, ckpt.config_hash);
  const char has_text = ckpt.encoder ? 1 : 0;
  out.write(&has_text, 1);
  ckpt.state.params.write(out);
  if (ckpt.encoder) ckpt.encoder->write(out);
  ckpt.state.adam.write(out);
}

Checkpoint read_checkpoint(std::istream& in, const AdamConfig& adam_config) {
  io::expect_magic(in, "TAHGCKP1");
  Checkpoint ckpt;
  ckpt.state.epoch = io::read_u64(in);
  ckpt.config_hash = io::read_u64(in);
  char has_text = 0;
  io::read_exact(in, &has_text, 1);
  ckpt.state.params = HgnnParams::read(in);
  if (has_text) ckpt.encoder = TextEncoder::read(in);
  ckpt.state.adam = Adam::read(in, adam_config);
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_checkpoint(ckpt, out);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const AdamConfig& adam_config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return read_checkpoint(in, adam_config);
}

PipelineResult run_pipeline(const RunConfig& cfg, const Dataset& ds) {
  auto t0 = std::chrono::steady_clock::now();
  auto s1 = run_stage1(cfg, ds.hypergraph, ds.corpus);
  const double t1 = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  auto s2 = run_stage2(cfg, ds.hypergraph, ds.corpus, s1.encoder);
  const double t2 = seconds_since(t0);
  auto emb = embed_nodes(ds.hypergraph, ds.corpus, s1.encoder, s2.state.params);
  return PipelineResult{std::move(s1), std::move(s2), std::move(emb), t1, t2};
}

}  // namespace tahg
