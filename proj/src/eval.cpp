#include "mpfnd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace mpfnd {

MetricsReport compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
  if (scores.size() != labels.size()) throw DomainError("scores/labels length mismatch");
  if (scores.empty()) throw DomainError("compute_metrics on empty input");
  MetricsReport rep;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    bool actual_real = labels[i] == 0;
    bool predicted_real = scores[i] > threshold;
    if (actual_real) {
      ++rep.n_pos;
      predicted_real ? ++tp : ++fn;
    } else {
      ++rep.n_neg;
      predicted_real ? ++fp : ++tn;
    }
  }
  rep.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  rep.precision = (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  rep.recall = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  rep.f1 = (rep.precision + rep.recall > 0.0)
               ? 2.0 * rep.precision * rep.recall / (rep.precision + rep.recall)
               : 0.0;
  if (rep.n_pos == 0 || rep.n_neg == 0) {
    throw DomainError("AUC undefined: only one class present");
  }

  // Mann-Whitney rank statistic with average ranks for ties. Doubled rank
  // sums stay integral, so this matches the pairwise count bit-for-bit.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  unsigned long long doubled_pos_rank_sum = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1..j share the average; doubled average = i+1 + j.
    unsigned long long doubled_rank = static_cast<unsigned long long>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 0) doubled_pos_rank_sum += doubled_rank;
    }
    i = j;
  }
  unsigned long long np = rep.n_pos, nn = rep.n_neg;
  unsigned long long doubled_u = doubled_pos_rank_sum - np * (np + 1);
  rep.auc = static_cast<double>(doubled_u) / static_cast<double>(2 * np * nn);
  return rep;
}

double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw DomainError("scores/labels length mismatch");
  unsigned long long np = 0, nn = 0, doubled = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 0) continue;
    ++np;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 0) continue;
      if (scores[i] > scores[j]) doubled += 2;
      else if (scores[i] == scores[j]) doubled += 1;
    }
  }
  for (int l : labels) {
    if (l != 0) ++nn;
  }
  if (np == 0 || nn == 0) throw DomainError("AUC undefined: only one class present");
  return static_cast<double>(doubled) / static_cast<double>(2 * np * nn);
}

MetricsReport probe_logreg(const std::map<NodeId, Tensor>& embeddings, const HeteroGraph& g,
                           const Split& split, std::uint64_t seed, double l2) {
  auto fetch = [&](const NodeId& id) -> const Tensor& {
    auto it = embeddings.find(id);
    if (it == embeddings.end()) throw CoverageError("no embedding for news " + id);
    return it->second;
  };
  if (split.train.empty() || split.test.empty()) throw DataError("probe needs train and test parts");
  std::size_t d = fetch(split.train.front()).numel();
  Tensor w({d});
  double b = 0.0;
  // slight symmetric-breaking jitter; the objective is convex so this only
  // fixes the tie at exactly-zero gradients
  std::mt19937_64 rng(derive_seed(seed, "logreg"));
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  for (std::size_t i = 0; i < d; ++i) w[i] = jitter(rng);

  bool seen[2] = {false, false};
  for (const NodeId& id : split.train) {
    auto lab = g.label(id);
    if (!lab) throw DataError("unlabeled news in probe train part: " + id);
    seen[static_cast<std::size_t>(*lab)] = true;
  }
  if (!seen[0] || !seen[1]) throw DataError("probe train part must contain both classes");

  const double lr = 0.5;
  const std::size_t iters = 500;
  std::size_t n = split.train.size();
  for (std::size_t it = 0; it < iters; ++it) {
    Tensor gw({d});
    double gb = 0.0;
    for (const NodeId& id : split.train) {
      const Tensor& x = fetch(id);
      // target 1 for the positive (real) class
      double y = *g.label(id) == 0 ? 1.0 : 0.0;
      double p = 1.0 / (1.0 + std::exp(-(dot(w, x) + b)));
      double err = (p - y) / static_cast<double>(n);
      gw.add_scaled(x, err);
      gb += err;
    }
    gw.add_scaled(w, l2);
    w.add_scaled(gw, -lr);
    b -= lr * gb;
  }

  std::vector<double> scores;
  std::vector<int> labels;
  for (const NodeId& id : split.test) {
    scores.push_back(1.0 / (1.0 + std::exp(-(dot(w, fetch(id)) + b))));
    labels.push_back(*g.label(id));
  }
  return compute_metrics(scores, labels);
}

std::vector<double> score_news(const Model& model, const ParamStore& params,
                               const std::vector<NodeId>& ids, std::uint64_t sample_seed,
                               std::size_t batch_size) {
  std::vector<double> scores;
  if (batch_size == 0) batch_size = ids.size();
  for (std::size_t i = 0; i < ids.size(); i += batch_size) {
    std::vector<NodeId> batch(ids.begin() + static_cast<std::ptrdiff_t>(i),
                              ids.begin() + static_cast<std::ptrdiff_t>(std::min(i + batch_size, ids.size())));
    auto cache = model.forward_batch(batch, params, sample_seed);
    for (const Tensor& p : cache.probs) scores.push_back(p[0]);
  }
  return scores;
}

MetricsReport evaluate_model(const Model& model, const ParamStore& params,
                             const std::vector<NodeId>& test_ids, std::uint64_t sample_seed,
                             std::size_t batch_size) {
  std::vector<double> scores = score_news(model, params, test_ids, sample_seed, batch_size);
  std::vector<int> labels;
  for (const NodeId& id : test_ids) {
    auto lab = model.graph().label(id);
    if (!lab) throw DataError("unlabeled news in evaluation: " + id);
    labels.push_back(*lab);
  }
  return compute_metrics(scores, labels);
}

AblationResult ablate_temporal(const HeteroGraph& g, const FeatureBundle& bundle,
                               const Split& split, const ModelConfig& base,
                               const TrainConfig& tcfg) {
  AblationResult out;
  std::uint64_t eval_seed = derive_seed(tcfg.seed, "eval-sampling");
  {
    ModelConfig cfg = base;
    cfg.temporal_mode = TemporalMode::Gru;
    Model model(g, bundle, cfg);
    TrainResult r = train_model(model, split, tcfg);
    out.with_temporal = evaluate_model(model, r.params, split.test, eval_seed, tcfg.batch_size);
    out.history_with = std::move(r.history);
  }
  {
    ModelConfig cfg = base;
    cfg.temporal_mode = TemporalMode::Attention;
    Model model(g, bundle, cfg);
    TrainResult r = train_model(model, split, tcfg);
    out.without_temporal = evaluate_model(model, r.params, split.test, eval_seed, tcfg.batch_size);
    out.history_without = std::move(r.history);
  }
  return out;
}

std::vector<RatioRow> sweep_training_ratio(const HeteroGraph& g, const FeatureBundle& bundle,
                                           const std::vector<double>& ratios,
                                           const ModelConfig& mcfg, const TrainConfig& tcfg) {
  std::vector<RatioRow> rows;
  for (double ratio : ratios) {
    Split split;
    try {
      split = split_dataset(g, g.labeled_news(), ratio, tcfg.seed);
      bool train_both[2] = {false, false};
      for (const NodeId& id : split.train) train_both[static_cast<std::size_t>(*g.label(id))] = true;
      if (!train_both[0] || !train_both[1] || split.val.empty() || split.test.empty()) {
        throw DataError("degenerate split");
      }
    } catch (const Error& e) {
      throw DataError("degenerate split at ratio " + std::to_string(ratio) + ": " + e.what());
    }
    TrainConfig tc = tcfg;
    tc.train_frac = ratio;
    Model model(g, bundle, mcfg);
    TrainResult r = train_model(model, split, tc);
    MetricsReport rep = evaluate_model(model, r.params, split.test,
                                       derive_seed(tc.seed, "eval-sampling"), tc.batch_size);
    rows.push_back(RatioRow{ratio, rep.auc});
  }
  return rows;
}

void save_ratio_csv(const std::vector<RatioRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open ratio table for writing: " + path);
  os << "ratio,auc\n";
  char buf[64];
  for (const RatioRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%g,%.17g", r.ratio, r.auc);
    os << buf << '\n';
  }
  if (!os) throw IoError("write failure on ratio table: " + path);
}

void export_embeddings(const std::map<NodeId, Tensor>& embeddings, const HeteroGraph& g,
                       const std::string& path) {
  if (embeddings.empty()) throw DomainError("export_embeddings on empty map");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open embedding file for writing: " + path);
  char buf[64];
  for (const auto& [id, v] : embeddings) {
    os << id << ',';
    auto lab = g.label(id);
    if (lab.has_value()) os << *lab;
    for (std::size_t i = 0; i < v.numel(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
  if (!os) throw IoError("write failure on embedding file: " + path);
}

void save_metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows,
                      const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open metrics file for writing: " + path);
  os << "run,precision,recall,f1,accuracy,auc\n";
  char buf[256];
  for (const auto& [name, m] : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%.17g,%.17g", name.c_str(), m.precision,
                  m.recall, m.f1, m.accuracy, m.auc);
    os << buf << '\n';
  }
  if (!os) throw IoError("write failure on metrics file: " + path);
}

}  // namespace mpfnd
