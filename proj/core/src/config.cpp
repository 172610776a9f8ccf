#include "tahg/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tahg/error.hpp"

namespace tahg {
namespace {

enum class Kind { Real, Count, Seed, Flag, Text };

struct Field {
  const char* key;
  Kind kind;
  void* ptr;
};

std::vector<Field> fields(RunConfig& c) {
  return {
      {"seed", Kind::Seed, &c.seed},
      {"encoder.feature_dim", Kind::Count, &c.encoder.feature_dim},
      {"encoder.output_dim", Kind::Count, &c.encoder.output_dim},
      {"encoder.ngram_min", Kind::Count, &c.encoder.ngram_min},
      {"encoder.ngram_max", Kind::Count, &c.encoder.ngram_max},
      {"encoder.hash_seed", Kind::Seed, &c.encoder.hash_seed},
      {"stage1.epochs", Kind::Count, &c.stage1.epochs},
      {"stage1.lr", Kind::Real, &c.stage1.lr},
      {"stage1.margin", Kind::Real, &c.stage1.margin},
      {"stage1.batch_size", Kind::Count, &c.stage1.batch_size},
      {"stage1.refresh_per_step", Kind::Flag, &c.stage1.refresh_per_step},
      {"stage1.strict_negative_pool", Kind::Flag, &c.stage1.strict_negative_pool},
      {"stage2.epochs", Kind::Count, &c.stage2.epochs},
      {"stage2.lr", Kind::Real, &c.stage2.lr},
      {"stage2.weight_decay", Kind::Real, &c.stage2.weight_decay},
      {"stage2.tau_n", Kind::Real, &c.stage2.temperatures.tau_n},
      {"stage2.tau_e", Kind::Real, &c.stage2.temperatures.tau_e},
      {"stage2.tau_s", Kind::Real, &c.stage2.temperatures.tau_s},
      {"stage2.lambda_e", Kind::Real, &c.stage2.weights.lambda_e},
      {"stage2.lambda_s", Kind::Real, &c.stage2.weights.lambda_s},
      {"stage2.s", Kind::Count, &c.stage2.walk.s},
      {"stage2.walk_len", Kind::Count, &c.stage2.walk.length},
      {"stage2.sampled_nodes", Kind::Flag, &c.stage2.walk.sampled_nodes},
      {"stage2.anchor_ratio", Kind::Real, &c.stage2.anchor_ratio},
      {"stage2.tau_drop", Kind::Real, &c.stage2.drop.tau_drop},
      {"stage2.hidden_dim", Kind::Count, &c.stage2.hidden_dim},
      {"stage2.output_dim", Kind::Count, &c.stage2.output_dim},
      {"stage2.layers", Kind::Count, &c.stage2.layers},
      {"prompt.domain_text", Kind::Text, &c.prompt.domain_text},
      {"prompt.max_neighbor_snippets", Kind::Count, &c.prompt.max_neighbor_snippets},
      {"prompt.snippet_len", Kind::Count, &c.prompt.snippet_len},
      {"prompt.include_domain", Kind::Flag, &c.prompt.include_domain},
      {"prompt.include_topology", Kind::Flag, &c.prompt.include_topology},
      {"prompt.include_context", Kind::Flag, &c.prompt.include_context},
      {"ablation.disable_stage1_pretrain", Kind::Flag, &c.ablation.disable_stage1_pretrain},
      {"ablation.random_drop_instead_of_semantic", Kind::Flag, &c.ablation.random_drop_instead_of_semantic},
      {"ablation.disable_subgraph_loss", Kind::Flag, &c.ablation.disable_subgraph_loss},
      {"ablation.disable_prompt", Kind::Flag, &c.ablation.disable_prompt},
      {"ablation.disable_domain", Kind::Flag, &c.ablation.disable_domain},
      {"ablation.disable_topology", Kind::Flag, &c.ablation.disable_topology},
      {"ablation.disable_context", Kind::Flag, &c.ablation.disable_context},
  };
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string render_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') {
      out.push_back('\\');
      out.push_back(ch);
    } else if (ch == '\n') {
      out += "\\n";
    } else {
      out.push_back(ch);
    }
  }
  out.push_back('"');
  return out;
}

std::string unquote(std::string_view v, const std::string& where) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') fail(ErrorCode::ParseError, where + ": expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    char ch = v[i];
    if (ch == '\\') {
      if (i + 2 >= v.size()) fail(ErrorCode::ParseError, where + ": dangling escape");
      ch = v[++i];
      if (ch == 'n') {
        out.push_back('\n');
      } else if (ch == '"' || ch == '\\') {
        out.push_back(ch);
      } else {
        fail(ErrorCode::ParseError, where + ": unknown escape");
      }
    } else if (ch == '"') {
      fail(ErrorCode::ParseError, where + ": unescaped quote");
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

std::uint64_t parse_unsigned(std::string_view v, const std::string& where) {
  int base = 10;
  if (v.size() > 2 && v[0] == '0' && (v[1] == 'x' || v[1] == 'X')) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t x = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x, base);
  if (ec != std::errc() || p != v.data() + v.size()) fail(ErrorCode::ParseError, where + ": expected an unsigned integer");
  return x;
}

double parse_real(std::string_view v, const std::string& where) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    fail(ErrorCode::ParseError, where + ": expected a finite number");
  }
  return x;
}

bool parse_flag(std::string_view v, const std::string& where) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail(ErrorCode::ParseError, where + ": expected true or false");
}

void assign(const Field& f, std::string_view value, const std::string& where) {
  value = trim(value);
  switch (f.kind) {
    case Kind::Real: *static_cast<double*>(f.ptr) = parse_real(value, where); break;
    case Kind::Count: *static_cast<std::size_t*>(f.ptr) = parse_unsigned(value, where); break;
    case Kind::Seed: *static_cast<std::uint64_t*>(f.ptr) = parse_unsigned(value, where); break;
    case Kind::Flag: *static_cast<bool*>(f.ptr) = parse_flag(value, where); break;
    case Kind::Text:
      // Bare words are accepted as strings on the command line.
      *static_cast<std::string*>(f.ptr) =
          (!value.empty() && value.front() == '"') ? unquote(value, where) : std::string(value);
      break;
  }
}

std::string render(const Field& f) {
  switch (f.kind) {
    case Kind::Real: return render_real(*static_cast<double*>(f.ptr));
    case Kind::Count: return std::to_string(*static_cast<std::size_t*>(f.ptr));
    case Kind::Seed: return std::to_string(*static_cast<std::uint64_t*>(f.ptr));
    case Kind::Flag: return *static_cast<bool*>(f.ptr) ? "true" : "false";
    case Kind::Text: return quote(*static_cast<std::string*>(f.ptr));
  }
  return {};
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_string) {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

void require(bool ok, const std::string& msg) {
  if (!ok) fail(ErrorCode::InvalidConfig, msg);
}

}  // namespace

std::string AblationFlags::label() const {
  std::string out;
  auto add = [&out](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += "+";
    out += name;
  };
  add(disable_stage1_pretrain, "w/o pre");
  add(random_drop_instead_of_semantic, "w/o shd");
  add(disable_subgraph_loss, "w/o s");
  add(disable_prompt, "w/o prompt");
  add(disable_domain, "w/o domain");
  add(disable_topology, "w/o topology");
  add(disable_context, "w/o context");
  return out.empty() ? "full" : out;
}

void RunConfig::validate() const {
  require(encoder.feature_dim > 0 && encoder.output_dim > 0, "encoder dimensions must be positive");
  require(encoder.ngram_min >= 1 && encoder.ngram_min <= encoder.ngram_max, "need 1 <= ngram_min <= ngram_max");
  require(stage1.lr > 0.0, "stage1.lr must be positive");
  require(stage1.margin >= 0.0, "stage1.margin must be nonnegative");
  require(stage2.lr > 0.0, "stage2.lr must be positive");
  require(stage2.weight_decay >= 0.0, "stage2.weight_decay must be nonnegative");
  stage2.temperatures.validate();
  stage2.weights.validate();
  if (stage2.walk.s < 1) fail(ErrorCode::InvalidS, "stage2.s must be at least 1");
  require(stage2.walk.length >= 1, "stage2.walk_len must be at least 1");
  if (!(stage2.anchor_ratio > 0.0) || stage2.anchor_ratio > 100.0) {
    fail(ErrorCode::InvalidRatio, "stage2.anchor_ratio must be in (0, 100]");
  }
  stage2.drop.validate();
  require(stage2.hidden_dim > 0 && stage2.output_dim > 0 && stage2.layers > 0,
          "stage2 dimensions and layer count must be positive");
  prompt.validate();
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  auto table = fields(cfg);
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorCode::ParseError, where + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(ErrorCode::ParseError, where + ": expected key = value");
    const std::string key = std::string(trim(line.substr(0, eq)));
    const std::string full = section.empty() ? key : section + "." + key;
    bool found = false;
    for (const auto& f : table) {
      if (full == f.key) {
        assign(f, line.substr(eq + 1), where);
        found = true;
        break;
      }
    }
    if (!found) fail(ErrorCode::ParseError, where + ": unknown key '" + full + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& f : fields(cfg)) {
    if (key == f.key) {
      assign(f, value, std::string(key));
      return;
    }
  }
  fail(ErrorCode::InvalidConfig, "unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> config_keys() {
  RunConfig scratch;
  std::vector<std::string> out;
  for (const auto& f : fields(scratch)) out.emplace_back(f.key);
  return out;
}

std::string to_toml(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out;
  std::string section;
  for (const auto& f : fields(copy)) {
    const std::string_view key = f.key;
    const auto dot = key.find('.');
    const std::string sec = dot == std::string_view::npos ? "" : std::string(key.substr(0, dot));
    const std::string name = std::string(dot == std::string_view::npos ? key : key.substr(dot + 1));
    if (sec != section) {
      out += "\n[" + sec + "]\n";
      section = sec;
    }
    out += name + " = " + render(f) + "\n";
  }
  return out;
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_toml(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace tahg
