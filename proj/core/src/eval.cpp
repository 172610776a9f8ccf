#include "tahg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "tahg/error.hpp"
#include "tahg/optim.hpp"

namespace tahg {
namespace {

std::uint64_t split_seed(std::uint64_t base, std::size_t split, std::size_t init, std::uint64_t purpose) {
  return Rng::mix(Rng::mix(Rng::mix(base ^ purpose) + split) + init);
}

std::uint64_t hash_members(std::span<const NodeId> sorted) {
  std::uint64_t h = 0x84222325cbf29ce4ULL ^ sorted.size();
  for (NodeId v : sorted) h = Rng::mix(h ^ v);
  return h;
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

// Standardizes all three blocks with the train block's column statistics.
void standardize(Matrix& train, Matrix& val, Matrix& test) {
  const RowVector mean = train.colwise().mean();
  RowVector sd = ((train.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(train.rows()))
                     .sqrt()
                     .matrix();
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    if (!(sd[j] > 1e-12)) sd[j] = 1.0;
  }
  for (Matrix* m : {&train, &val, &test}) {
    *m = ((m->rowwise() - mean).array().rowwise() / sd.array()).matrix();
  }
}

// ---- multinomial logistic regression ----

struct Softmax {
  Matrix w;  // d x C
  RowVector b;
};

double lr_objective(const Softmax& p, const Matrix& x, const std::vector<int>& y, double l2, Softmax* grad) {
  Matrix logits = x * p.w;
  logits.rowwise() += p.b;
  const auto n = x.rows();
  double loss = 0.0;
  Matrix d = Matrix::Zero(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    const RowVector e = (logits.row(i).array() - mx).exp().matrix();
    const double z = e.sum();
    loss += mx + std::log(z) - logits(i, y[static_cast<std::size_t>(i)]);
    if (grad) {
      d.row(i) = e / z;
      d(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss = loss * inv_n + 0.5 * l2 * p.w.squaredNorm();
  if (grad) {
    grad->w = x.transpose() * d * inv_n + l2 * p.w;
    grad->b = d.colwise().sum() * inv_n;
  }
  return loss;
}

void fit_logistic(Softmax& p, const Matrix& x, const std::vector<int>& y, double l2) {
  constexpr int kMaxIter = 500;
  constexpr double kTol = 1e-6;
  double step = 1.0;
  Softmax g;
  double f = lr_objective(p, x, y, l2, &g);
  for (int it = 0; it < kMaxIter; ++it) {
    const double gnorm2 = g.w.squaredNorm() + g.b.squaredNorm();
    if (std::sqrt(gnorm2) < kTol) break;
    step = std::min(step * 2.0, 1e3);
    Softmax next;
    double f_next = 0.0;
    while (true) {
      next.w = p.w - step * g.w;
      next.b = p.b - step * g.b;
      f_next = lr_objective(next, x, y, l2, nullptr);
      if (f_next <= f - 0.5 * step * gnorm2 || step < 1e-12) break;
      step *= 0.5;
    }
    p = std::move(next);
    f = lr_objective(p, x, y, l2, &g);
  }
}

double accuracy(const Softmax& p, const Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0) return 0.0;
  Matrix logits = x * p.w;
  logits.rowwise() += p.b;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    hits += best == y[static_cast<std::size_t>(i)];
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(x.rows());
}

// ---- two-layer perceptron ----

struct Mlp {
  Matrix w1;
  RowVector b1;
  Vector w2;
  double b2 = 0.0;
};

Mlp init_mlp(std::size_t d, std::size_t h, Rng& rng) {
  Mlp m;
  const double a1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(h));
  m.w1.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(h));
  for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = rng.uniform(-a1, a1);
  m.b1.resize(static_cast<Eigen::Index>(h));
  for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1[i] = rng.uniform(-a1, a1);
  m.w2.resize(static_cast<Eigen::Index>(h));
  for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2[i] = rng.uniform(-a2, a2);
  m.b2 = rng.uniform(-a2, a2);
  return m;
}

Vector mlp_logits(const Mlp& m, const Matrix& x, Matrix* hidden_pre) {
  Matrix pre = x * m.w1;
  pre.rowwise() += m.b1;
  Vector out = pre.cwiseMax(0.0) * m.w2;
  out.array() += m.b2;
  if (hidden_pre) *hidden_pre = std::move(pre);
  return out;
}

double mlp_accuracy(const Mlp& m, const Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0) return 0.0;
  const Vector logits = mlp_logits(m, x, nullptr);
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    // sigmoid(z) >= 0.5 exactly when z >= 0
    const int pred = logits[i] >= 0.0 ? 1 : 0;
    hits += pred == y[static_cast<std::size_t>(i)];
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(x.rows());
}

void mlp_step(Mlp& m, Adam& adam, const Matrix& x, const std::vector<int>& y) {
  Matrix pre;
  const Vector logits = mlp_logits(m, x, &pre);
  const auto n = static_cast<double>(x.rows());
  Vector d_logit(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-logits[i]));
    d_logit[i] = (p - y[static_cast<std::size_t>(i)]) / n;
  }
  const Matrix h = pre.cwiseMax(0.0);
  Vector g_w2 = h.transpose() * d_logit;
  double g_b2 = d_logit.sum();
  Matrix d_h = d_logit * m.w2.transpose();
  d_h = d_h.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  Matrix g_w1 = x.transpose() * d_h;
  RowVector g_b1 = d_h.colwise().sum();
  adam.begin_step();
  adam.apply(0, m.w1.data(), g_w1.data(), static_cast<std::size_t>(m.w1.size()));
  adam.apply(1, m.b1.data(), g_b1.data(), static_cast<std::size_t>(m.b1.size()));
  adam.apply(2, m.w2.data(), g_w2.data(), static_cast<std::size_t>(m.w2.size()));
  adam.apply(3, &m.b2, &g_b2, 1);
}

}  // namespace

void SplitSpec::validate() const {
  if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0) || std::abs(train + val + test - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidParams, "split fractions must be positive and sum to 1");
  }
  if (num_splits == 0 || inits_per_split == 0) fail(ErrorCode::InvalidParams, "split and init counts must be positive");
}

Split make_split(std::size_t n, const SplitSpec& spec, std::size_t split_index) {
  spec.validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(split_seed(spec.seed, split_index, 0, 0x5b11u));
  rng.shuffle(order);
  const auto n_train = std::min(n, static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(n))));
  const auto n_val =
      std::min(n - n_train, static_cast<std::size_t>(std::llround(spec.val * static_cast<double>(n))));
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
               order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  return s;
}

void summarize(EvalReport& report) {
  const auto& xs = report.per_split;
  if (xs.empty()) {
    report.mean = report.std = 0.0;
    return;
  }
  const double n = static_cast<double>(xs.size());
  report.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - report.mean) * (x - report.mean);
  report.std = std::sqrt(ss / n);
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["task"] = report.task;
  j["mean"] = report.mean;
  j["std"] = report.std;
  j["per_split"] = report.per_split;
  j["config_hash"] = report.config_hash;
  return j.dump();
}

EvalReport report_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.task = j.at("task").get<std::string>();
    r.mean = j.at("mean").get<double>();
    r.std = j.at("std").get<double>();
    r.per_split = j.at("per_split").get<std::vector<double>>();
    r.config_hash = j.value("config_hash", std::string{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("eval report: ") + e.what());
  }
}

EvalReport linear_probe(const Matrix& z, const NodeLabels& labels, const SplitSpec& spec,
                        std::span<const double> l2_grid) {
  spec.validate();
  if (labels.labels.size() != static_cast<std::size_t>(z.rows())) {
    fail(ErrorCode::DimensionMismatch, "one label slot per embedding row required");
  }
  if (labels.num_classes < 2) fail(ErrorCode::InvalidParams, "linear probe needs at least two classes");
  if (l2_grid.empty()) fail(ErrorCode::InvalidParams, "empty l2 grid");
  if (!z.allFinite()) fail(ErrorCode::NonFiniteInput, "embeddings contain NaN/Inf");
  std::vector<std::size_t> items;
  for (std::size_t v = 0; v < labels.labels.size(); ++v) {
    if (labels.labels[v] != NodeLabels::kUnlabeled) items.push_back(v);
  }
  const auto classes = static_cast<Eigen::Index>(labels.num_classes);

  EvalReport report;
  report.task = "node_classification";
  for (std::size_t si = 0; si < spec.num_splits; ++si) {
    const Split split = make_split(items.size(), spec, si);
    auto pick = [&](const std::vector<std::size_t>& idx, std::vector<int>& y) {
      std::vector<std::size_t> rows;
      for (std::size_t k : idx) {
        rows.push_back(items[k]);
        y.push_back(labels.labels[items[k]]);
      }
      return gather_rows(z, rows);
    };
    std::vector<int> y_tr, y_va, y_te;
    Matrix x_tr = pick(split.train, y_tr);
    Matrix x_va = pick(split.val, y_va);
    Matrix x_te = pick(split.test, y_te);
    std::vector<char> seen(static_cast<std::size_t>(classes), 0);
    for (int c : y_tr) seen[static_cast<std::size_t>(c)] = 1;
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      fail(ErrorCode::DegenerateSplit, "split " + std::to_string(si) + " has a class missing from training");
    }
    standardize(x_tr, x_va, x_te);

    for (std::size_t init = 0; init < spec.inits_per_split; ++init) {
      Rng rng(split_seed(spec.seed, si, init, 0x11a7u));
      Softmax start{Matrix(z.cols(), classes), RowVector::Zero(classes)};
      for (Eigen::Index i = 0; i < start.w.size(); ++i) start.w.data()[i] = 0.01 * rng.normal();
      double best_val = -1.0;
      double best_test = 0.0;
      for (double l2 : l2_grid) {
        Softmax p = start;
        fit_logistic(p, x_tr, y_tr, l2);
        const double va = accuracy(p, x_va, y_va);
        if (va > best_val) {
          best_val = va;
          best_test = accuracy(p, x_te, y_te);
        }
      }
      report.per_split.push_back(best_test);
    }
  }
  summarize(report);
  return report;
}

CnsSampler::CnsSampler(const Hypergraph& hg) : hg_(&hg), neighbors_(hg.num_nodes()) {
  for (NodeId v = 0; v < hg.num_nodes(); ++v) neighbors_[v] = one_hop_neighbors(hg, v);
  edges_sorted_.reserve(hg.num_edges());
  for (EdgeId e = 0; e < hg.num_edges(); ++e) {
    auto m = hg.members(e);
    edges_sorted_.emplace_back(m.begin(), m.end());
    edge_hashes_.insert(hash_members(m));
  }
}

bool CnsSampler::is_existing(const std::vector<NodeId>& sorted_members) const {
  if (!edge_hashes_.count(hash_members(sorted_members))) return false;
  return std::find(edges_sorted_.begin(), edges_sorted_.end(), sorted_members) != edges_sorted_.end();
}

std::optional<std::vector<NodeId>> CnsSampler::sample(EdgeId e, Rng& rng) const {
  if (e >= hg_->num_edges()) fail(ErrorCode::HyperedgeIdOutOfRange, "hyperedge " + std::to_string(e));
  const auto& members = edges_sorted_[e];
  if (members.size() < 2) return std::nullopt;
  std::vector<NodeId> order = members;
  rng.shuffle(order);
  for (NodeId u : order) {
    std::vector<NodeId> candidates;
    bool first = true;
    for (NodeId w : members) {
      if (w == u) continue;
      if (first) {
        candidates = neighbors_[w];
        first = false;
      } else {
        std::vector<NodeId> next;
        std::set_intersection(candidates.begin(), candidates.end(), neighbors_[w].begin(), neighbors_[w].end(),
                              std::back_inserter(next));
        candidates = std::move(next);
      }
      if (candidates.empty()) break;
    }
    std::vector<std::vector<NodeId>> options;
    for (NodeId v : candidates) {
      if (std::binary_search(members.begin(), members.end(), v)) continue;
      std::vector<NodeId> neg;
      for (NodeId w : members) {
        if (w != u) neg.push_back(w);
      }
      neg.insert(std::upper_bound(neg.begin(), neg.end(), v), v);
      if (!is_existing(neg)) options.push_back(std::move(neg));
    }
    if (!options.empty()) return options[rng.uniform_index(options.size())];
  }
  return std::nullopt;
}

bool CnsSampler::is_valid_negative(EdgeId e, const std::vector<NodeId>& candidate) const {
  const auto& members = edges_sorted_.at(e);
  if (candidate.size() != members.size() || !std::is_sorted(candidate.begin(), candidate.end())) return false;
  std::vector<NodeId> kept;
  std::vector<NodeId> added;
  std::set_intersection(candidate.begin(), candidate.end(), members.begin(), members.end(), std::back_inserter(kept));
  std::set_difference(candidate.begin(), candidate.end(), members.begin(), members.end(), std::back_inserter(added));
  if (added.size() != 1 || kept.size() + 1 != members.size()) return false;
  const NodeId v = added.front();
  for (NodeId w : kept) {
    if (!std::binary_search(neighbors_[w].begin(), neighbors_[w].end(), v)) return false;
  }
  return !is_existing(candidate);
}

std::vector<NodeId> cns_negative(const Hypergraph& hg, EdgeId e, Rng& rng) {
  if (e >= hg.num_edges()) fail(ErrorCode::HyperedgeIdOutOfRange, "hyperedge " + std::to_string(e));
  if (hg.edge_degree(e) < 2) fail(ErrorCode::NoEligibleNegative, "hyperedge " + std::to_string(e) + " has fewer than 2 members");
  CnsSampler sampler(hg);
  auto neg = sampler.sample(e, rng);
  if (!neg) fail(ErrorCode::NoEligibleNegative, "no clique negative exists for hyperedge " + std::to_string(e));
  return *neg;
}

EvalReport hyperedge_prediction(const Matrix& z, const Hypergraph& hg, const SplitSpec& spec, Rng& rng,
                                const MlpConfig& mlp) {
  spec.validate();
  if (static_cast<std::size_t>(z.rows()) != hg.num_nodes()) {
    fail(ErrorCode::DimensionMismatch, "one embedding row per node required");
  }
  if (mlp.hidden == 0) fail(ErrorCode::InvalidParams, "MLP hidden width must be positive");
  if (!z.allFinite()) fail(ErrorCode::NonFiniteInput, "embeddings contain NaN/Inf");

  const CnsSampler sampler(hg);
  std::vector<RowVector> pos;
  std::vector<RowVector> neg;
  auto mean_of = [&z](std::span<const NodeId> nodes) {
    RowVector acc = RowVector::Zero(z.cols());
    for (NodeId v : nodes) acc += z.row(v);
    return RowVector(acc / static_cast<double>(nodes.size()));
  };
  for (EdgeId e = 0; e < hg.num_edges(); ++e) {
    if (hg.edge_degree(e) < 2) continue;
    auto n = sampler.sample(e, rng);
    if (!n) continue;
    pos.push_back(mean_of(hg.members(e)));
    neg.push_back(mean_of(*n));
  }
  if (pos.size() < 10) {
    fail(ErrorCode::DegenerateSplit, "only " + std::to_string(pos.size()) + " hyperedges have a clique negative");
  }

  EvalReport report;
  report.task = "hyperedge_prediction";
  for (std::size_t si = 0; si < spec.num_splits; ++si) {
    const Split split = make_split(pos.size(), spec, si);
    auto build = [&](const std::vector<std::size_t>& idx, std::vector<int>& y) {
      Matrix x(static_cast<Eigen::Index>(2 * idx.size()), z.cols());
      for (std::size_t k = 0; k < idx.size(); ++k) {
        x.row(static_cast<Eigen::Index>(2 * k)) = pos[idx[k]];
        x.row(static_cast<Eigen::Index>(2 * k + 1)) = neg[idx[k]];
        y.push_back(1);
        y.push_back(0);
      }
      return x;
    };
    std::vector<int> y_tr, y_va, y_te;
    Matrix x_tr = build(split.train, y_tr);
    Matrix x_va = build(split.val, y_va);
    Matrix x_te = build(split.test, y_te);
    standardize(x_tr, x_va, x_te);

    for (std::size_t init = 0; init < spec.inits_per_split; ++init) {
      Rng init_rng(split_seed(spec.seed, si, init, 0xed9eu));
      Mlp m = init_mlp(static_cast<std::size_t>(z.cols()), mlp.hidden, init_rng);
      Adam adam(AdamConfig{mlp.lr, 0.9, 0.999, 1e-8, mlp.weight_decay});
      double best_val = mlp_accuracy(m, x_va, y_va);
      double best_test = mlp_accuracy(m, x_te, y_te);
      for (std::size_t ep = 0; ep < mlp.epochs; ++ep) {
        mlp_step(m, adam, x_tr, y_tr);
        const double va = mlp_accuracy(m, x_va, y_va);
        if (va > best_val) {
          best_val = va;
          best_test = mlp_accuracy(m, x_te, y_te);
        }
      }
      report.per_split.push_back(best_test);
    }
  }
  summarize(report);
  return report;
}

}  // namespace tahg
