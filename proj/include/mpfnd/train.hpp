#pragma once

#include <vector>

#include "mpfnd/model.hpp"

namespace mpfnd {

enum class OptimizerKind { Adam, Sgd };

OptimizerKind optimizer_from_string(const std::string& s);

struct TrainConfig {
  double lr = 1e-4;
  double train_frac = 0.70;
  std::size_t patience = 20;
  std::size_t max_epochs = 300;
  std::size_t batch_size = 32;  // 0 means full-batch
  std::uint64_t seed = 42;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct Split {
  std::vector<NodeId> train, val, test;
  std::uint64_t seed = 0;
};

// Seeded shuffle, ⌊train_frac·n⌋ train, remainder halved into val/test,
// stratified by label (per-part class proportions within one item).
Split split_dataset(const HeteroGraph& g, const std::vector<NodeId>& labeled, double train_frac,
                    std::uint64_t seed);

// L = −[y·log P_fake + (1−y)·log P_real], probabilities clamped to 1e−12.
double cross_entropy(const Tensor& probs, int y);
// Gradient at the logits of softmax+cross-entropy: probs − onehot(y).
Tensor cross_entropy_logit_grad(const Tensor& probs, int y);

class Optimizer {
 public:
  Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}
  // Applies one update in fixed parameter-name order and zeroes gradients.
  void step(ParamStore& params);

 private:
  TrainConfig cfg_;
  std::size_t t_ = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> moments_;  // (m, v) per tensor
};

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  ParamStore params;  // best-validation checkpoint
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
};

// Epoch loop with per-epoch instance re-sampling, minibatch updates, and
// early stopping on validation loss.
TrainResult train_model(const Model& model, const Split& split, const TrainConfig& cfg);

// Mean loss over `ids` at a fixed sampling seed (used for validation/test).
double mean_loss(const Model& model, const ParamStore& params, const std::vector<NodeId>& ids,
                 std::uint64_t sample_seed, std::size_t batch_size);

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace mpfnd
