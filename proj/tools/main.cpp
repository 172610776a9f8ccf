// tahg: command-line driver for dataset preparation, both pretraining stages,
// evaluation and report generation.
//
// Exit codes: 0 ok, 2 usage, 3 data error, 4 numeric failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tahg/config.hpp"
#include "tahg/dataset.hpp"
#include "tahg/error.hpp"
#include "tahg/eval.hpp"
#include "tahg/report.hpp"
#include "tahg/synth.hpp"
#include "tahg/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(tahg::ErrorCode code) {
  using tahg::ErrorCode;
  switch (code) {
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::ZeroRow:
    case ErrorCode::ZeroVector:
      return kExitNumeric;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidRatio:
    case ErrorCode::InvalidS:
    case ErrorCode::NonPositiveTemperature:
      return kExitUsage;
    default:
      return kExitData;
  }
}

// Options shared by every subcommand.
struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool json = false;
  std::size_t jobs = 1;
  std::vector<std::string> set;
};

std::pair<std::string, std::string> split_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

// Defaults, then the config file, then --set, then --seed.
tahg::RunConfig resolve_config(const Globals& g, bool require_file) {
  if (require_file && g.config.empty()) throw UsageError("this command needs --config");
  tahg::RunConfig cfg = g.config.empty() ? tahg::RunConfig{} : tahg::load_config(g.config);
  for (const auto& kv : g.set) {
    const auto [key, value] = split_assignment(kv);
    tahg::set_config_value(cfg, key, value);
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.validate();
  return cfg;
}

fs::path require_out(const Globals& g) {
  if (g.out.empty()) throw UsageError("this command needs --out");
  fs::create_directories(g.out);
  return g.out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) tahg::fail(tahg::ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

void print_stats(const tahg::Dataset& ds, bool json) {
  const auto stats = tahg::compute_stats(ds);
  std::cout << (json ? tahg::format_stats_json(stats) : tahg::format_stats(stats)) << '\n';
}

void save_dataset(const tahg::Dataset& ds, const fs::path& dir, bool with_jsonl) {
  tahg::save_bundle(ds, dir / "dataset.bin");
  if (with_jsonl) {
    std::ofstream out(dir / "dataset.jsonl", std::ios::binary);
    if (!out) tahg::fail(tahg::ErrorCode::IoError, "cannot write " + (dir / "dataset.jsonl").string());
    tahg::write_jsonl(ds, out);
  }
}

std::string percent(const tahg::EvalReport& r) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s accuracy %.2f +- %.2f over %zu runs", r.task.c_str(), r.mean, r.std,
                r.per_split.size());
  return buf;
}

// ---- evaluation -----------------------------------------------------------

struct EvalOptions {
  std::size_t splits = 20;
  std::size_t inits = 5;
  std::size_t mlp_hidden = 128;
  std::size_t mlp_epochs = 200;
};

tahg::SplitSpec split_spec(tahg::SplitSpec spec, const EvalOptions& o, std::uint64_t seed) {
  spec.num_splits = o.splits;
  spec.inits_per_split = o.inits;
  spec.seed = seed;
  return spec;
}

tahg::EvalReport eval_node(const tahg::Matrix& z, const tahg::Dataset& ds, const EvalOptions& o,
                           std::uint64_t run_seed, const std::string& hash) {
  if (!ds.labels.has_labels()) tahg::fail(tahg::ErrorCode::InvariantViolation, "dataset has no node labels");
  const auto spec =
      split_spec(tahg::SplitSpec::node_classification(), o, tahg::derive_seed(run_seed, tahg::SeedStream::Eval, 0));
  auto report = tahg::linear_probe(z, ds.labels, spec);
  report.config_hash = hash;
  return report;
}

tahg::EvalReport eval_edge(const tahg::Matrix& z, const tahg::Dataset& ds, const EvalOptions& o,
                           std::uint64_t run_seed, const std::string& hash) {
  const auto spec =
      split_spec(tahg::SplitSpec::hyperedge_prediction(), o, tahg::derive_seed(run_seed, tahg::SeedStream::Eval, 1));
  tahg::Rng rng(tahg::derive_seed(run_seed, tahg::SeedStream::Eval, 2));
  tahg::MlpConfig mlp;
  mlp.hidden = o.mlp_hidden;
  mlp.epochs = o.mlp_epochs;
  auto report = tahg::hyperedge_prediction(z, ds.hypergraph, spec, rng, mlp);
  report.config_hash = hash;
  return report;
}

// ---- stage-2 runs -----------------------------------------------------------

struct TrainInputs {
  std::optional<tahg::TextEncoder> encoder;   // skips stage 1 when present
  std::optional<tahg::Matrix> features;       // frozen external features
  std::optional<tahg::Checkpoint> resume;
  bool eval_node = false;
  bool eval_edge = false;
  EvalOptions eval;
};

struct RunJob {
  tahg::RunConfig config;
  fs::path dir;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

tahg::RunRecord execute_run(const RunJob& job, const tahg::Dataset& ds, const TrainInputs& in) {
  const auto& cfg = job.config;
  fs::create_directories(job.dir);
  tahg::RunRecord rec;
  rec.name = job.dir.filename().string();
  rec.config = cfg;

  std::optional<tahg::TextEncoder> encoder;
  std::optional<tahg::PrecomputedEmbeddings> frozen;
  if (in.features) {
    frozen.emplace(*in.features);
  } else if (in.resume && in.resume->encoder) {
    encoder = in.resume->encoder;
  } else if (in.encoder) {
    encoder = in.encoder;
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    encoder = tahg::run_stage1(cfg, ds.hypergraph, ds.corpus).encoder;
    rec.stage1_seconds = seconds_since(t0);
  }
  const tahg::EmbeddingProvider& provider =
      frozen ? static_cast<const tahg::EmbeddingProvider&>(*frozen) : *encoder;

  const auto t0 = std::chrono::steady_clock::now();
  auto s2 = tahg::run_stage2(cfg, ds.hypergraph, ds.corpus, provider, in.resume ? &in.resume->state : nullptr);
  rec.stage2_seconds = seconds_since(t0);
  rec.mean_subgraph_edges = s2.mean_subgraph_edges;
  rec.loss_trace = s2.trace;
  rec.final_loss = s2.trace.empty() ? 0.0 : s2.trace.back().total;

  const auto hash = tahg::config_hash(cfg);
  tahg::Checkpoint ckpt{hash, encoder, s2.state};
  tahg::save_checkpoint(ckpt, job.dir / "checkpoint.bin");
  const auto emb = tahg::embed_nodes(ds.hypergraph, ds.corpus, provider, s2.state.params);
  tahg::save_embeddings(emb.nodes, job.dir / "node_embeddings.emb");
  tahg::save_embeddings(emb.edges, job.dir / "edge_embeddings.emb");

  // Training results are on disk before evaluation can fail.
  tahg::write_run(job.dir, rec);
  if (!in.eval_node && !in.eval_edge) return rec;
  if (in.eval_node) rec.node = eval_node(emb.nodes, ds, in.eval, cfg.seed, tahg::hash_hex(hash));
  if (in.eval_edge) rec.edge = eval_edge(emb.nodes, ds, in.eval, cfg.seed, tahg::hash_hex(hash));
  tahg::write_run(job.dir, rec);
  return rec;
}

// Cartesian product of "key=v1,v2,..." axes, in the order given.
std::vector<std::vector<std::pair<std::string, std::string>>> expand_sweep(const std::vector<std::string>& axes) {
  std::vector<std::vector<std::pair<std::string, std::string>>> grid{{}};
  for (const auto& axis : axes) {
    const auto [key, list] = split_assignment(axis);
    std::vector<std::string> values;
    std::stringstream ss(list);
    for (std::string v; std::getline(ss, v, ',');) {
      if (!v.empty()) values.push_back(v);
    }
    if (values.empty()) throw UsageError("sweep axis '" + key + "' has no values");
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& point : grid) {
      for (const auto& v : values) {
        auto p = point;
        p.emplace_back(key, v);
        next.push_back(std::move(p));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

std::string run_dir_name(std::size_t index, const std::vector<std::pair<std::string, std::string>>& point) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%03zu", index);
  std::string name = prefix;
  for (const auto& [k, v] : point) {
    name += '_';
    name += k;
    name += '-';
    for (char c : v) name += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  }
  return name;
}

// Runs the jobs on up to `jobs` threads. Returns the worst exit code.
int run_all(const std::vector<RunJob>& runs, const tahg::Dataset& ds, const TrainInputs& in, std::size_t jobs,
            bool json) {
  std::mutex io;
  std::atomic<std::size_t> next{0};
  std::vector<int> codes(runs.size(), kExitOk);
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        const auto rec = execute_run(runs[i], ds, in);
        std::lock_guard lock(io);
        if (json) {
          std::cout << "{\"run\":\"" << rec.name << "\",\"final_loss\":" << rec.final_loss
                    << ",\"mean_subgraph_edges\":" << rec.mean_subgraph_edges;
          if (rec.node) std::cout << ",\"node_mean\":" << rec.node->mean << ",\"node_std\":" << rec.node->std;
          if (rec.edge) std::cout << ",\"edge_mean\":" << rec.edge->mean << ",\"edge_std\":" << rec.edge->std;
          std::cout << "}\n";
        } else {
          std::cout << rec.name << ": final loss " << rec.final_loss << ", mean walk hyperedges "
                    << rec.mean_subgraph_edges;
          if (rec.node) std::cout << ", " << percent(*rec.node);
          if (rec.edge) std::cout << ", " << percent(*rec.edge);
          std::cout << '\n';
        }
      } catch (const tahg::Error& e) {
        std::lock_guard lock(io);
        std::cerr << runs[i].dir.string() << ": " << e.what() << '\n';
        codes[i] = exit_code_for(e.code());
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(runs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return *std::max_element(codes.begin(), codes.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Text-attributed hypergraph pretraining and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "RunConfig file (TOML subset)");
  app.add_option("--seed", g.seed, "Run seed; overrides the config");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--json", g.json, "Print machine-readable JSON");
  app.add_option("--jobs", g.jobs, "Concurrent runs for --sweep")->check(CLI::PositiveNumber);
  app.add_option("--set", g.set, "Override a config key (key=value, repeatable)");

  std::string data_path;
  std::string input_path;
  bool export_jsonl = false;

  auto* ingest = app.add_subcommand("ingest", "Validate JSON-lines or a bundle and write dataset.bin");
  ingest->add_option("input", input_path, "JSON-lines file or TAHGDS01 bundle")->required();
  ingest->add_flag("--export-jsonl", export_jsonl, "Also write canonical dataset.jsonl");

  auto* reconstruct = app.add_subcommand("reconstruct", "Turn a pairwise graph into hyperedges by maximal cliques");
  reconstruct->add_option("input", input_path, "JSON-lines with node and {u, v} records")->required();

  tahg::SynthParams synth_params;
  auto* synth = app.add_subcommand("synth", "Generate a planted-partition text-attributed hypergraph");
  synth->add_option("--nodes", synth_params.num_nodes, "Number of nodes")->capture_default_str();
  synth->add_option("--blocks", synth_params.blocks, "Number of blocks (classes)")->capture_default_str();
  synth->add_option("--edge-size", synth_params.edge_size, "Hyperedge size")->capture_default_str();
  synth->add_option("--intra", synth_params.intra_edges, "Intra-block hyperedges")->capture_default_str();
  synth->add_option("--cross", synth_params.cross_edges, "Cross-block hyperedges")->capture_default_str();
  synth->add_option("--tokens", synth_params.tokens_per_node, "Tokens per node text")->capture_default_str();
  synth->add_option("--vocab", synth_params.vocab_per_block, "Vocabulary per block")->capture_default_str();
  synth->add_option("--shared-vocab", synth_params.shared_vocab, "Shared vocabulary size")->capture_default_str();
  synth->add_option("--shared-fraction", synth_params.shared_fraction, "Share of tokens from the shared pool")
      ->capture_default_str();

  auto* pretrain_text = app.add_subcommand("pretrain-text", "Stage 1: structure-aware text encoder pretraining");
  pretrain_text->add_option("--data", data_path, "Dataset (bundle or JSON-lines)")->required();

  std::string text_encoder_path;
  std::string features_path;
  std::string resume_path;
  std::vector<std::string> sweep_axes;
  std::vector<std::string> eval_tasks;
  EvalOptions eval_opts;
  auto* pretrain_hgnn = app.add_subcommand("pretrain-hgnn", "Stage 2: hypergraph encoder pretraining");
  pretrain_hgnn->add_option("--data", data_path, "Dataset (bundle or JSON-lines)")->required();
  auto* enc_opt = pretrain_hgnn->add_option("--text-encoder", text_encoder_path, "Stage-1 encoder; skips stage 1");
  pretrain_hgnn->add_option("--features", features_path, "Frozen node features (TAHGEMB1)")->excludes(enc_opt);
  pretrain_hgnn->add_option("--resume", resume_path, "Continue from a checkpoint");
  pretrain_hgnn->add_option("--sweep", sweep_axes, "Grid axis key=v1,v2,... (repeatable); one run per point");
  pretrain_hgnn->add_option("--eval", eval_tasks, "Evaluate after training: node, edge")
      ->check(CLI::IsMember({"node", "edge"}));

  std::string checkpoint_path;
  auto* embed = app.add_subcommand("embed", "Write node and hyperedge embeddings from a checkpoint");
  embed->add_option("--data", data_path, "Dataset (bundle or JSON-lines)")->required();
  embed->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  embed->add_option("--features", features_path, "Frozen node features when the checkpoint has no text encoder");

  std::string run_path;
  std::string embeddings_path;
  auto add_eval_options = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_path, "Dataset (bundle or JSON-lines)")->required();
    cmd->add_option("--run", run_path, "Run directory: reads its embeddings and config, writes the report there");
    cmd->add_option("--embeddings", embeddings_path, "Node embedding file (TAHGEMB1)");
    cmd->add_option("--splits", eval_opts.splits, "Random splits")->capture_default_str();
    cmd->add_option("--inits", eval_opts.inits, "Initializations per split")->capture_default_str();
  };
  auto* eval_node_cmd = app.add_subcommand("eval-node", "Linear-probe node classification");
  add_eval_options(eval_node_cmd);
  auto* eval_edge_cmd = app.add_subcommand("eval-edge", "Hyperedge prediction against clique negatives");
  add_eval_options(eval_edge_cmd);
  eval_edge_cmd->add_option("--hidden", eval_opts.mlp_hidden, "MLP hidden width")->capture_default_str();
  eval_edge_cmd->add_option("--epochs", eval_opts.mlp_epochs, "MLP training epochs")->capture_default_str();

  auto* report = app.add_subcommand("report", "Aggregate run directories into summary.json and CSV series");
  report->add_option("runs", input_path, "A run directory or a directory of runs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      const auto ds = tahg::load_dataset(input_path);
      if (!g.out.empty()) save_dataset(ds, require_out(g), export_jsonl);
      print_stats(ds, g.json);
    } else if (reconstruct->parsed()) {
      std::ifstream in(input_path, std::ios::binary);
      if (!in) tahg::fail(tahg::ErrorCode::IoError, "cannot open " + input_path);
      auto pairwise = tahg::read_pairwise_jsonl(in);
      tahg::Dataset ds;
      ds.hypergraph = tahg::build_hypergraph(pairwise.graph.num_nodes(), tahg::reconstruct_from_graph(pairwise.graph));
      ds.corpus = std::move(pairwise.corpus);
      ds.labels = std::move(pairwise.labels);
      save_dataset(ds, require_out(g), true);
      print_stats(ds, g.json);
    } else if (synth->parsed()) {
      if (g.seed) synth_params.seed = *g.seed;
      const auto ds = tahg::generate_synthetic(synth_params);
      save_dataset(ds, require_out(g), true);
      print_stats(ds, g.json);
    } else if (pretrain_text->parsed()) {
      const auto cfg = resolve_config(g, true);
      const auto out = require_out(g);
      const auto ds = tahg::load_dataset(data_path);
      const auto s1 = tahg::run_stage1(cfg, ds.hypergraph, ds.corpus);
      s1.encoder.save(out / "text_encoder.bin");
      write_text(out / "config.toml", tahg::to_toml(cfg));
      std::ostringstream trace;
      trace << "epoch,loss\n";
      for (std::size_t i = 0; i < s1.loss_trace.size(); ++i) trace << i << ',' << s1.loss_trace[i] << '\n';
      write_text(out / "stage1_trace.csv", trace.str());
      if (g.json) {
        std::cout << "{\"epochs\":" << s1.loss_trace.size() << ",\"final_loss\":" << s1.final_loss << "}\n";
      } else {
        std::cout << "stage 1: " << s1.loss_trace.size() << " epochs, final loss " << s1.final_loss << '\n';
      }
    } else if (pretrain_hgnn->parsed()) {
      const auto base = resolve_config(g, true);
      const auto out = require_out(g);
      const auto ds = tahg::load_dataset(data_path);
      TrainInputs in;
      if (!text_encoder_path.empty()) in.encoder = tahg::TextEncoder::load(text_encoder_path);
      if (!features_path.empty()) in.features = tahg::load_embeddings(features_path);
      if (!resume_path.empty()) {
        if (!sweep_axes.empty()) throw UsageError("--resume cannot be combined with --sweep");
        in.resume = tahg::load_checkpoint(resume_path, tahg::stage2_adam_config(base.stage2));
      }
      in.eval_node = std::find(eval_tasks.begin(), eval_tasks.end(), "node") != eval_tasks.end();
      in.eval_edge = std::find(eval_tasks.begin(), eval_tasks.end(), "edge") != eval_tasks.end();

      std::vector<RunJob> runs;
      if (sweep_axes.empty()) {
        runs.push_back({base, out});
      } else {
        const auto grid = expand_sweep(sweep_axes);
        for (std::size_t i = 0; i < grid.size(); ++i) {
          RunJob job{base, out / run_dir_name(i, grid[i])};
          for (const auto& [k, v] : grid[i]) tahg::set_config_value(job.config, k, v);
          job.config.validate();
          runs.push_back(std::move(job));
        }
      }
      return run_all(runs, ds, in, g.jobs, g.json);
    } else if (embed->parsed()) {
      const auto out = require_out(g);
      const auto ds = tahg::load_dataset(data_path);
      const auto ckpt = tahg::load_checkpoint(checkpoint_path, tahg::AdamConfig{});
      std::optional<tahg::PrecomputedEmbeddings> frozen;
      if (!ckpt.encoder) {
        if (features_path.empty()) throw UsageError("checkpoint has no text encoder; pass --features");
        frozen.emplace(tahg::load_embeddings(features_path));
      }
      const tahg::EmbeddingProvider& provider =
          frozen ? static_cast<const tahg::EmbeddingProvider&>(*frozen) : *ckpt.encoder;
      const auto emb = tahg::embed_nodes(ds.hypergraph, ds.corpus, provider, ckpt.state.params);
      tahg::save_embeddings(emb.nodes, out / "node_embeddings.emb");
      tahg::save_embeddings(emb.edges, out / "edge_embeddings.emb");
      std::cout << "wrote " << emb.nodes.rows() << " node and " << emb.edges.rows() << " hyperedge embeddings\n";
    } else if (eval_node_cmd->parsed() || eval_edge_cmd->parsed()) {
      const bool node_task = eval_node_cmd->parsed();
      if (run_path.empty() && embeddings_path.empty()) throw UsageError("pass --run or --embeddings");
      const auto ds = tahg::load_dataset(data_path);
      std::uint64_t seed = g.seed.value_or(0);
      std::string hash;
      fs::path target;
      if (!run_path.empty()) {
        const auto cfg = tahg::load_config(fs::path(run_path) / "config.toml");
        if (!g.seed) seed = cfg.seed;
        hash = tahg::hash_hex(tahg::config_hash(cfg));
        if (embeddings_path.empty()) embeddings_path = (fs::path(run_path) / "node_embeddings.emb").string();
        target = run_path;
      }
      if (!g.out.empty()) target = require_out(g);
      const auto z = tahg::load_embeddings(embeddings_path);
      const auto r = node_task ? eval_node(z, ds, eval_opts, seed, hash) : eval_edge(z, ds, eval_opts, seed, hash);
      if (!target.empty()) write_text(target / (node_task ? "eval_node.json" : "eval_edge.json"), tahg::to_json(r) + "\n");
      std::cout << (g.json ? tahg::to_json(r) : percent(r)) << '\n';
    } else if (report->parsed()) {
      const auto runs = tahg::collect_runs(input_path);
      const auto rep = tahg::build_report(runs);
      const fs::path out = g.out.empty() ? fs::path(input_path) : require_out(g);
      write_text(out / "summary.json", rep.summary_json);
      write_text(out / "series.csv", rep.series_csv);
      write_text(out / "loss_traces.csv", rep.loss_csv);
      if (g.json) {
        std::cout << rep.summary_json;
      } else {
        std::cout << rep.series_csv;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const tahg::Error& e) {
    std::cerr << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "IoError: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
