#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tahg/corpus.hpp"
#include "tahg/hypergraph.hpp"

namespace tahg {

// A text-attributed hypergraph with optional node labels.
struct Dataset {
  Hypergraph hypergraph;
  TextCorpus corpus;
  NodeLabels labels;
};

struct DatasetStats {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  double avg_edge_size = 0.0;
  double avg_tokens = 0.0;
  std::int32_t num_classes = 0;
};

DatasetStats compute_stats(const Dataset& ds);
// "|V|=1778 |E|=2118 avg|e|=2 avg_tokens=198 #class=6"; averages print with at
// most two decimals and no trailing zeros.
std::string format_stats(const DatasetStats& stats);
std::string format_stats_json(const DatasetStats& stats);

// JSON-lines ingestion. Records:
//   {"id": int, "text": string, "label": optional int}
//   {"edge": [int, ...], "weight": optional float}
//   {"u": int, "v": int}
// Node ids must be exactly 0..n-1. A file with pair records and no edge
// records is turned into a hypergraph by maximal-clique reconstruction.
// Errors: ParseError (with line number), EmptyDataset, InvariantViolation,
// plus the build_hypergraph errors.
Dataset read_jsonl(std::istream& in);
Dataset load_jsonl(const std::filesystem::path& path);

// Canonical form: node records by id, then hyperedges in column order. The
// weight field is omitted when it is exactly 1.
void write_jsonl(const Dataset& ds, std::ostream& out);

// Node records plus a pairwise graph ({"u","v"} records).
struct PairwiseInput {
  TextCorpus corpus;
  NodeLabels labels;
  PairwiseGraph graph{0, {}};
};
PairwiseInput read_pairwise_jsonl(std::istream& in);

// Binary bundle, magic "TAHGDS01", little-endian:
//   u64 |V|, u64 |E|, i32 num_classes,
//   per node: u64 len, text bytes, i32 label (-1 = none),
//   per hyperedge: u64 size, size x u32 node ids, f64 weight.
void save_bundle(const Dataset& ds, const std::filesystem::path& path);
Dataset load_bundle(const std::filesystem::path& path);
void write_bundle(const Dataset& ds, std::ostream& out);
Dataset read_bundle(std::istream& in);

// Sniffs the magic and reads either a bundle or JSON-lines.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace tahg
