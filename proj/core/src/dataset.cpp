#include "tahg/dataset.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "tahg/error.hpp"

namespace tahg {

using nlohmann::json;

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

DatasetStats compute_stats(const Dataset& ds) {
  DatasetStats s;
  s.num_nodes = ds.hypergraph.num_nodes();
  s.num_edges = ds.hypergraph.num_edges();
  if (s.num_edges) s.avg_edge_size = static_cast<double>(ds.hypergraph.nnz()) / static_cast<double>(s.num_edges);
  std::size_t tokens = 0;
  for (const auto& t : ds.corpus.texts) tokens += tokenize(t).size();
  if (s.num_nodes) s.avg_tokens = static_cast<double>(tokens) / static_cast<double>(s.num_nodes);
  s.num_classes = ds.labels.num_classes;
  return s;
}

namespace {

std::string trim_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s(buf);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::int64_t get_int(const json& j, const char* key, std::size_t line) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) parse_error(line, std::string("field '") + key + "' must be an integer");
  return v.get<std::int64_t>();
}

NodeId to_node_id(std::int64_t x, std::size_t line) {
  if (x < 0 || x > static_cast<std::int64_t>(UINT32_MAX) - 1) parse_error(line, "node id out of range");
  return static_cast<NodeId>(x);
}

struct RawRecords {
  std::vector<std::pair<NodeId, std::string>> nodes;
  std::vector<std::pair<NodeId, std::int32_t>> labels;
  std::vector<std::vector<NodeId>> edges;
  std::vector<double> weights;
  bool any_weight = false;
  std::vector<std::pair<NodeId, NodeId>> pairs;
};

RawRecords read_records(std::istream& in) {
  RawRecords raw;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      parse_error(line_no, e.what());
    }
    if (!j.is_object()) parse_error(line_no, "record must be a JSON object");
    try {
      if (j.contains("edge")) {
        const auto& members = j.at("edge");
        if (!members.is_array()) parse_error(line_no, "'edge' must be an array");
        std::vector<NodeId> edge;
        for (const auto& m : members) {
          if (!m.is_number_integer()) parse_error(line_no, "'edge' entries must be integers");
          edge.push_back(to_node_id(m.get<std::int64_t>(), line_no));
        }
        if (edge.empty()) fail(ErrorCode::EmptyHyperedge, "line " + std::to_string(line_no) + ": empty hyperedge");
        double w = 1.0;
        if (j.contains("weight")) {
          if (!j.at("weight").is_number()) parse_error(line_no, "'weight' must be a number");
          w = j.at("weight").get<double>();
          raw.any_weight = true;
        }
        raw.edges.push_back(std::move(edge));
        raw.weights.push_back(w);
      } else if (j.contains("id")) {
        const NodeId id = to_node_id(get_int(j, "id", line_no), line_no);
        std::string t;
        if (j.contains("text")) {
          if (!j.at("text").is_string()) parse_error(line_no, "'text' must be a string");
          t = j.at("text").get<std::string>();
        } else {
          parse_error(line_no, "node record without 'text'");
        }
        if (j.contains("label") && !j.at("label").is_null()) {
          const auto c = get_int(j, "label", line_no);
          if (c < 0 || c > INT32_MAX) parse_error(line_no, "label must be a non-negative int");
          raw.labels.emplace_back(id, static_cast<std::int32_t>(c));
        }
        raw.nodes.emplace_back(id, std::move(t));
      } else if (j.contains("u") && j.contains("v")) {
        raw.pairs.emplace_back(to_node_id(get_int(j, "u", line_no), line_no),
                               to_node_id(get_int(j, "v", line_no), line_no));
      } else {
        parse_error(line_no, "unrecognized record (expected node, edge, or pair fields)");
      }
    } catch (const json::exception& e) {
      parse_error(line_no, e.what());
    }
  }
  return raw;
}

void collect_nodes(RawRecords& raw, TextCorpus& corpus, NodeLabels& labels) {
  const std::size_t n = raw.nodes.size();
  corpus.texts.assign(n, {});
  std::vector<bool> seen(n, false);
  for (auto& [id, text] : raw.nodes) {
    if (id >= n) fail(ErrorCode::InvariantViolation, "node ids must be 0..n-1; found " + std::to_string(id));
    if (seen[id]) fail(ErrorCode::InvariantViolation, "duplicate node id " + std::to_string(id));
    seen[id] = true;
    corpus.texts[id] = std::move(text);
  }
  labels.labels.assign(n, NodeLabels::kUnlabeled);
  labels.num_classes = 0;
  for (auto [id, c] : raw.labels) {
    labels.labels[id] = c;
    labels.num_classes = std::max(labels.num_classes, c + 1);
  }
}

}  // namespace

std::string format_stats(const DatasetStats& s) {
  return "|V|=" + std::to_string(s.num_nodes) + " |E|=" + std::to_string(s.num_edges) +
         " avg|e|=" + trim_number(s.avg_edge_size) + " avg_tokens=" + trim_number(s.avg_tokens) +
         " #class=" + std::to_string(s.num_classes);
}

std::string format_stats_json(const DatasetStats& s) {
  json j = {{"num_nodes", s.num_nodes},
            {"num_edges", s.num_edges},
            {"avg_edge_size", s.avg_edge_size},
            {"avg_tokens", s.avg_tokens},
            {"num_classes", s.num_classes}};
  return j.dump();
}

Dataset read_jsonl(std::istream& in) {
  RawRecords raw = read_records(in);
  if (raw.nodes.empty() && raw.edges.empty() && raw.pairs.empty()) {
    fail(ErrorCode::EmptyDataset, "no records found");
  }
  if (raw.nodes.empty()) fail(ErrorCode::EmptyDataset, "no node records found");
  if (!raw.edges.empty() && !raw.pairs.empty()) {
    fail(ErrorCode::InvariantViolation, "file mixes hyperedge records and pairwise records");
  }
  Dataset ds;
  collect_nodes(raw, ds.corpus, ds.labels);
  const std::size_t n = ds.corpus.size();
  if (!raw.pairs.empty()) {
    PairwiseGraph g(n, raw.pairs);
    ds.hypergraph = build_hypergraph(n, reconstruct_from_graph(g));
  } else {
    std::optional<std::vector<double>> weights;
    if (raw.any_weight) weights = raw.weights;
    ds.hypergraph = build_hypergraph(n, raw.edges, std::move(weights));
  }
  return ds;
}

Dataset load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return read_jsonl(in);
}

void write_jsonl(const Dataset& ds, std::ostream& out) {
  const auto& hg = ds.hypergraph;
  for (NodeId v = 0; v < hg.num_nodes(); ++v) {
    json j = {{"id", v}, {"text", ds.corpus.texts[v]}};
    if (v < ds.labels.labels.size() && ds.labels.labels[v] != NodeLabels::kUnlabeled) {
      j["label"] = ds.labels.labels[v];
    }
    out << j.dump() << '\n';
  }
  for (EdgeId e = 0; e < hg.num_edges(); ++e) {
    auto m = hg.members(e);
    json j = {{"edge", std::vector<NodeId>(m.begin(), m.end())}};
    if (hg.weight(e) != 1.0) j["weight"] = hg.weight(e);
    out << j.dump() << '\n';
  }
}

PairwiseInput read_pairwise_jsonl(std::istream& in) {
  RawRecords raw = read_records(in);
  if (raw.nodes.empty()) fail(ErrorCode::EmptyDataset, "no node records found");
  if (!raw.edges.empty()) fail(ErrorCode::InvariantViolation, "pairwise input must not contain hyperedge records");
  PairwiseInput out;
  collect_nodes(raw, out.corpus, out.labels);
  out.graph = PairwiseGraph(out.corpus.size(), raw.pairs);
  return out;
}

void write_bundle(const Dataset& ds, std::ostream& out) {
  const auto& hg = ds.hypergraph;
  io::write_magic(out, "TAHGDS01");
  io::write_u64(out, hg.num_nodes());
  io::write_u64(out, hg.num_edges());
  io::write_i32(out, ds.labels.num_classes);
  for (NodeId v = 0; v < hg.num_nodes(); ++v) {
    io::write_string(out, ds.corpus.texts[v]);
    io::write_i32(out, v < ds.labels.labels.size() ? ds.labels.labels[v] : NodeLabels::kUnlabeled);
  }
  for (EdgeId e = 0; e < hg.num_edges(); ++e) {
    auto m = hg.members(e);
    io::write_u64(out, m.size());
    for (NodeId v : m) io::write_u32(out, v);
    io::write_f64(out, hg.weight(e));
  }
}

Dataset read_bundle(std::istream& in) {
  io::expect_magic(in, "TAHGDS01");
  const auto n = io::read_u64(in);
  const auto m = io::read_u64(in);
  if (n > (1ULL << 31) || m > (1ULL << 34)) fail(ErrorCode::BadFormat, "implausible bundle dimensions");
  Dataset ds;
  ds.labels.num_classes = io::read_i32(in);
  ds.corpus.texts.resize(n);
  ds.labels.labels.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    ds.corpus.texts[v] = io::read_string(in);
    ds.labels.labels[v] = io::read_i32(in);
  }
  ds.labels.validate();
  std::vector<std::vector<NodeId>> edges(m);
  std::vector<double> weights(m);
  for (std::size_t e = 0; e < m; ++e) {
    const auto k = io::read_u64(in);
    if (k > n) fail(ErrorCode::BadFormat, "hyperedge larger than |V|");
    edges[e].resize(k);
    for (auto& v : edges[e]) v = io::read_u32(in);
    weights[e] = io::read_f64(in);
  }
  ds.hypergraph = build_hypergraph(n, edges, std::move(weights));
  return ds;
}

void save_bundle(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  write_bundle(ds, out);
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

Dataset load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return read_bundle(in);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  const bool is_bundle = in.gcount() == 8 && std::string_view(magic, 8) == "TAHGDS01";
  in.clear();
  in.seekg(0);
  return is_bundle ? read_bundle(in) : read_jsonl(in);
}

}  // namespace tahg
