#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tahg/config.hpp"
#include "tahg/eval.hpp"
#include "tahg/trainer.hpp"

namespace tahg {

// One training run as laid out on disk:
//   config.toml      the RunConfig
//   run.json         timings, final loss, mean walk length
//   eval_node.json   optional EvalReport
//   eval_edge.json   optional EvalReport
//   loss_trace.csv   optional stage-2 loss trace
//   checkpoint.bin and embedding files, not read here
struct RunRecord {
  std::string name;
  RunConfig config;
  double mean_subgraph_edges = 0.0;
  double stage1_seconds = 0.0;
  double stage2_seconds = 0.0;
  double final_loss = 0.0;
  std::optional<EvalReport> node;
  std::optional<EvalReport> edge;
  std::vector<LossRecord> loss_trace;
};

// Writes config.toml, run.json, whichever eval reports are present and the
// loss trace when it is non-empty.
void write_run(const std::filesystem::path& dir, const RunRecord& run);
RunRecord read_run(const std::filesystem::path& dir);

// Runs found at `root`: root itself when it holds run.json, otherwise its
// immediate subdirectories that do, ordered by name. Throws MissingRuns.
std::vector<RunRecord> collect_runs(const std::filesystem::path& root);

struct Report {
  std::string summary_json;  // per-run rows plus seed-averaged groups
  std::string series_csv;    // one row per run
  std::string loss_csv;      // run,epoch,L_n,L_e,L_s,L over all runs
};

// Means and standard deviations are recomputed from the stored per-split
// lists rather than copied from the reports.
Report build_report(const std::vector<RunRecord>& runs);

}  // namespace tahg
