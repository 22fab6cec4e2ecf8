#pragma once

#include <map>

#include "mpfnd/train.hpp"

namespace mpfnd {

// Positive class is Real (label 0), fixed by convention.
struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double auc = 0.0;
  std::size_t n_pos = 0;  // real
  std::size_t n_neg = 0;  // fake
};

// Thresholded metrics at `threshold` on P_real plus rank-statistic AUC with
// average ranks for ties. Labels use the graph convention Real=0, Fake=1.
MetricsReport compute_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

// O(n²) pairwise reference: fraction of (real, fake) pairs won, ties half.
double auc_bruteforce(const std::vector<double>& scores, const std::vector<int>& labels);

// L2-regularized logistic regression trained by gradient descent on frozen
// embeddings; metrics computed on the test part.
MetricsReport probe_logreg(const std::map<NodeId, Tensor>& embeddings, const HeteroGraph& g,
                           const Split& split, std::uint64_t seed, double l2 = 1e-3);

// Scores every id with a trained model at a fixed sampling seed; returns
// P_real per id (fused in evaluation batches of `batch_size`).
std::vector<double> score_news(const Model& model, const ParamStore& params,
                               const std::vector<NodeId>& ids, std::uint64_t sample_seed,
                               std::size_t batch_size);

MetricsReport evaluate_model(const Model& model, const ParamStore& params,
                             const std::vector<NodeId>& test_ids, std::uint64_t sample_seed,
                             std::size_t batch_size);

struct AblationResult {
  MetricsReport with_temporal;     // GRU aggregation
  MetricsReport without_temporal;  // attention aggregation
  std::vector<EpochStats> history_with, history_without;
};

// Trains two models identical except for the temporal mode, same seeds.
AblationResult ablate_temporal(const HeteroGraph& g, const FeatureBundle& bundle,
                               const Split& split, const ModelConfig& base,
                               const TrainConfig& tcfg);

struct RatioRow {
  double ratio = 0.0;
  double auc = 0.0;
};

// Re-split/retrain/evaluate per training ratio; fixed split seed per ratio.
std::vector<RatioRow> sweep_training_ratio(const HeteroGraph& g, const FeatureBundle& bundle,
                                           const std::vector<double>& ratios,
                                           const ModelConfig& mcfg, const TrainConfig& tcfg);
void save_ratio_csv(const std::vector<RatioRow>& rows, const std::string& path);

// CSV of (news id, label if known, embedding values at 17 significant digits).
void export_embeddings(const std::map<NodeId, Tensor>& embeddings, const HeteroGraph& g,
                       const std::string& path);

void save_metrics_csv(const std::vector<std::pair<std::string, MetricsReport>>& rows,
                      const std::string& path);

}  // namespace mpfnd
