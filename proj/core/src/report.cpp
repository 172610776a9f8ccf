#include "tahg/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tahg/error.hpp"

namespace tahg {
namespace fs = std::filesystem;
namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
}

std::string num(double x) {
  std::ostringstream ss;
  ss.precision(10);
  ss << x;
  return ss.str();
}

struct Stats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

Stats stats_of(const std::vector<double>& xs) {
  EvalReport r;
  r.per_split = xs;
  summarize(r);
  return {r.mean, r.std, xs.size()};
}

nlohmann::ordered_json stats_json(const Stats& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  j["n"] = s.n;
  return j;
}

}  // namespace

void write_run(const fs::path& dir, const RunRecord& run) {
  fs::create_directories(dir);
  spit(dir / "config.toml", to_toml(run.config));
  nlohmann::ordered_json j;
  j["config_hash"] = hash_hex(config_hash(run.config));
  j["label"] = run.config.ablation.label();
  j["mean_subgraph_edges"] = run.mean_subgraph_edges;
  j["stage1_seconds"] = run.stage1_seconds;
  j["stage2_seconds"] = run.stage2_seconds;
  j["final_loss"] = run.final_loss;
  spit(dir / "run.json", j.dump(2) + "\n");
  if (run.node) spit(dir / "eval_node.json", to_json(*run.node) + "\n");
  if (run.edge) spit(dir / "eval_edge.json", to_json(*run.edge) + "\n");
  if (!run.loss_trace.empty()) {
    std::ostringstream trace;
    write_loss_trace(run.loss_trace, trace);
    spit(dir / "loss_trace.csv", trace.str());
  }
}

RunRecord read_run(const fs::path& dir) {
  RunRecord r;
  r.name = dir.filename().string();
  if (r.name.empty()) r.name = dir.parent_path().filename().string();
  r.config = load_config(dir / "config.toml");
  try {
    const auto j = nlohmann::json::parse(slurp(dir / "run.json"));
    r.mean_subgraph_edges = j.value("mean_subgraph_edges", 0.0);
    r.stage1_seconds = j.value("stage1_seconds", 0.0);
    r.stage2_seconds = j.value("stage2_seconds", 0.0);
    r.final_loss = j.value("final_loss", 0.0);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, (dir / "run.json").string() + ": " + e.what());
  }
  if (fs::exists(dir / "eval_node.json")) r.node = report_from_json(slurp(dir / "eval_node.json"));
  if (fs::exists(dir / "eval_edge.json")) r.edge = report_from_json(slurp(dir / "eval_edge.json"));
  if (fs::exists(dir / "loss_trace.csv")) {
    std::istringstream trace(slurp(dir / "loss_trace.csv"));
    r.loss_trace = read_loss_trace(trace);
  }
  return r;
}

std::vector<RunRecord> collect_runs(const fs::path& root) {
  std::vector<RunRecord> out;
  if (fs::is_regular_file(root / "run.json")) {
    out.push_back(read_run(root));
    return out;
  }
  if (!fs::is_directory(root)) fail(ErrorCode::MissingRuns, root.string() + " is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "run.json")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) out.push_back(read_run(d));
  if (out.empty()) fail(ErrorCode::MissingRuns, "no run directories under " + root.string());
  return out;
}

Report build_report(const std::vector<RunRecord>& runs) {
  if (runs.empty()) fail(ErrorCode::MissingRuns, "nothing to report");
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream csv;
  csv << "run,label,seed,s,walk_len,anchor_ratio,lambda_e,lambda_s,node_mean,node_std,edge_mean,edge_std,"
         "mean_subgraph_edges,train_seconds\n";

  struct Group {
    const RunRecord* first = nullptr;
    std::vector<double> node_means;
    std::vector<double> edge_means;
    std::vector<double> walk_edges;
    std::vector<double> seconds;
  };
  std::map<std::string, Group> groups;
  std::ostringstream losses;
  losses << "run,epoch,L_n,L_e,L_s,L\n";

  for (const auto& r : runs) {
    const auto& c = r.config;
    const Stats node = r.node ? stats_of(r.node->per_split) : Stats{};
    const Stats edge = r.edge ? stats_of(r.edge->per_split) : Stats{};
    const double seconds = r.stage1_seconds + r.stage2_seconds;

    nlohmann::ordered_json row;
    row["run"] = r.name;
    row["label"] = c.ablation.label();
    row["config_hash"] = hash_hex(config_hash(c));
    row["seed"] = c.seed;
    row["s"] = c.stage2.walk.s;
    row["walk_len"] = c.stage2.walk.length;
    row["anchor_ratio"] = c.stage2.anchor_ratio;
    row["lambda_e"] = c.stage2.weights.lambda_e;
    row["lambda_s"] = c.stage2.weights.lambda_s;
    if (r.node) row["node"] = stats_json(node);
    if (r.edge) row["edge"] = stats_json(edge);
    row["mean_subgraph_edges"] = r.mean_subgraph_edges;
    row["train_seconds"] = seconds;
    row["final_loss"] = r.final_loss;
    rows.push_back(std::move(row));

    csv << r.name << ',' << c.ablation.label() << ',' << c.seed << ',' << c.stage2.walk.s << ','
        << c.stage2.walk.length << ',' << num(c.stage2.anchor_ratio) << ',' << num(c.stage2.weights.lambda_e)
        << ',' << num(c.stage2.weights.lambda_s) << ',' << (r.node ? num(node.mean) : "") << ','
        << (r.node ? num(node.std) : "") << ',' << (r.edge ? num(edge.mean) : "") << ','
        << (r.edge ? num(edge.std) : "") << ',' << num(r.mean_subgraph_edges) << ',' << num(seconds) << '\n';

    for (const auto& l : r.loss_trace) {
      losses << r.name << ',' << l.epoch << ',' << num(l.l_n) << ',' << num(l.l_e) << ',' << num(l.l_s) << ','
             << num(l.total) << '\n';
    }

    RunConfig unseeded = c;
    unseeded.seed = 0;
    auto& g = groups[hash_hex(config_hash(unseeded))];
    if (!g.first) g.first = &r;
    if (r.node) g.node_means.push_back(node.mean);
    if (r.edge) g.edge_means.push_back(edge.mean);
    g.walk_edges.push_back(r.mean_subgraph_edges);
    g.seconds.push_back(seconds);
  }

  // Groups appear in the order their first run appears.
  std::vector<std::pair<std::string, const Group*>> ordered;
  for (const auto& [key, g] : groups) ordered.emplace_back(key, &g);
  std::sort(ordered.begin(), ordered.end(), [&runs](const auto& a, const auto& b) {
    return a.second->first - runs.data() < b.second->first - runs.data();
  });
  nlohmann::ordered_json group_rows = nlohmann::ordered_json::array();
  for (const auto& [key, g] : ordered) {
    const auto& c = g->first->config;
    nlohmann::ordered_json row;
    row["group"] = key;
    row["label"] = c.ablation.label();
    row["s"] = c.stage2.walk.s;
    row["anchor_ratio"] = c.stage2.anchor_ratio;
    row["lambda_e"] = c.stage2.weights.lambda_e;
    row["lambda_s"] = c.stage2.weights.lambda_s;
    row["runs"] = g->seconds.size();
    if (!g->node_means.empty()) row["node"] = stats_json(stats_of(g->node_means));
    if (!g->edge_means.empty()) row["edge"] = stats_json(stats_of(g->edge_means));
    row["mean_subgraph_edges"] = stats_of(g->walk_edges).mean;
    row["train_seconds"] = stats_of(g->seconds).mean;
    group_rows.push_back(std::move(row));
  }

  nlohmann::ordered_json summary;
  summary["runs"] = std::move(rows);
  summary["groups"] = std::move(group_rows);
  return {summary.dump(2) + "\n", csv.str(), losses.str()};
}

}  // namespace tahg
