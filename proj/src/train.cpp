#include "mpfnd/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace mpfnd {

OptimizerKind optimizer_from_string(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd") return OptimizerKind::Sgd;
  throw ConfigError("unknown optimizer: " + s);
}

void TrainConfig::validate() const {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac must be in (0,1)");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
}

Split split_dataset(const HeteroGraph& g, const std::vector<NodeId>& labeled, double train_frac,
                    std::uint64_t seed) {
  if (labeled.size() < 3) throw DomainError("split_dataset needs at least 3 labeled news");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("train_frac must be in (0,1)");

  // Shuffle within each class, then fill the three parts per class by
  // largest-remainder so proportions stay within one item of the global
  // ratios.
  std::array<std::vector<NodeId>, 2> by_class;
  for (const NodeId& id : labeled) {
    auto lab = g.label(id);
    if (!lab.has_value()) throw DataError("unlabeled news in split input: " + id);
    by_class[static_cast<std::size_t>(*lab)].push_back(id);
  }
  std::mt19937_64 rng(derive_seed(seed, "split"));
  for (auto& cls : by_class) {
    std::sort(cls.begin(), cls.end());  // id-order base, independent of input order
    std::shuffle(cls.begin(), cls.end(), rng);
  }
  std::size_t n = labeled.size();
  std::size_t n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
  std::size_t rest = n - n_train;
  std::size_t n_val = rest / 2;
  if (rest % 2 == 1 && (rng() & 1)) ++n_val;  // odd remainder side picked by seed

  auto allocate = [](const std::array<std::size_t, 2>& avail, std::size_t want,
                     const std::array<double, 2>& weight) {
    std::array<std::size_t, 2> take{};
    std::array<double, 2> frac{};
    std::size_t total = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      double exact = weight[c];
      take[c] = std::min(avail[c], static_cast<std::size_t>(std::floor(exact)));
      frac[c] = exact - std::floor(exact);
      total += take[c];
    }
    while (total < want) {
      std::size_t pick = (frac[0] >= frac[1] && take[0] < avail[0]) || take[1] >= avail[1] ? 0 : 1;
      ++take[pick];
      frac[pick] = -1.0;
      ++total;
    }
    return take;
  };

  std::array<std::size_t, 2> avail{by_class[0].size(), by_class[1].size()};
  std::array<double, 2> w_train{train_frac * static_cast<double>(avail[0]),
                                train_frac * static_cast<double>(avail[1])};
  auto take_train = allocate(avail, n_train, w_train);
  std::array<std::size_t, 2> rest_c{avail[0] - take_train[0], avail[1] - take_train[1]};
  std::array<double, 2> w_val{static_cast<double>(rest_c[0]) / 2.0,
                              static_cast<double>(rest_c[1]) / 2.0};
  auto take_val = allocate(rest_c, n_val, w_val);

  Split split;
  split.seed = seed;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& cls = by_class[c];
    std::size_t i = 0;
    for (; i < take_train[c]; ++i) split.train.push_back(cls[i]);
    for (; i < take_train[c] + take_val[c]; ++i) split.val.push_back(cls[i]);
    for (; i < cls.size(); ++i) split.test.push_back(cls[i]);
  }
  return split;
}

double cross_entropy(const Tensor& probs, int y) {
  if (probs.ndim() != 1 || probs.numel() != 2) throw DomainError("cross_entropy expects 2 probabilities");
  double sum = probs[0] + probs[1];
  if (probs[0] < -1e-9 || probs[1] < -1e-9 || std::fabs(sum - 1.0) > 1e-6) {
    throw DomainError("cross_entropy input is not a probability pair");
  }
  if (y != 0 && y != 1) throw DomainError("label must be 0 or 1");
  double p_real = std::max(probs[0], 1e-12);
  double p_fake = std::max(probs[1], 1e-12);
  return -(y * std::log(p_fake) + (1 - y) * std::log(p_real));
}

Tensor cross_entropy_logit_grad(const Tensor& probs, int y) {
  Tensor g = probs;
  g[static_cast<std::size_t>(y == 0 ? 0 : 1)] -= 1.0;
  return g;
}

void Optimizer::step(ParamStore& params) {
  ++t_;
  for (auto& [name, gp] : params.items()) {
    if (!gp.grad.all_finite()) throw TrainingError("non-finite gradient in tensor " + name);
    if (cfg_.optimizer == OptimizerKind::Sgd) {
      gp.value.add_scaled(gp.grad, -cfg_.lr);
    } else {
      auto it = moments_.find(name);
      if (it == moments_.end()) {
        it = moments_.emplace(name, std::make_pair(Tensor(gp.value.shape()),
                                                   Tensor(gp.value.shape()))).first;
      }
      Tensor& m = it->second.first;
      Tensor& v = it->second.second;
      double b1 = cfg_.adam_beta1, b2 = cfg_.adam_beta2;
      double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
      double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
      for (std::size_t i = 0; i < gp.value.numel(); ++i) {
        double g = gp.grad[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        gp.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
      }
    }
  }
  params.zero_grads();
}

namespace {
std::vector<std::vector<NodeId>> make_batches(const std::vector<NodeId>& ids,
                                              std::size_t batch_size) {
  std::vector<std::vector<NodeId>> batches;
  if (batch_size == 0) batch_size = ids.size();
  for (std::size_t i = 0; i < ids.size(); i += batch_size) {
    batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i),
                         ids.begin() + static_cast<std::ptrdiff_t>(std::min(i + batch_size, ids.size())));
  }
  return batches;
}

bool isolated(const Model& model, const NodeId& id) {
  const auto& pools = model.pools_for(id);
  return pools.ps.empty() && pools.pu.empty();
}
}  // namespace

double mean_loss(const Model& model, const ParamStore& params, const std::vector<NodeId>& ids,
                 std::uint64_t sample_seed, std::size_t batch_size) {
  if (ids.empty()) throw DataError("mean_loss over an empty id list");
  double total = 0.0;
  for (const auto& batch : make_batches(ids, batch_size)) {
    auto cache = model.forward_batch(batch, params, sample_seed);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      auto lab = model.graph().label(batch[i]);
      if (!lab.has_value()) throw DataError("unlabeled news in loss computation: " + batch[i]);
      total += cross_entropy(cache.probs[i], *lab);
    }
  }
  return total / static_cast<double>(ids.size());
}

TrainResult train_model(const Model& model, const Split& split, const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.empty() || split.val.empty() || split.test.empty()) {
    throw DataError("split must be nonempty in all three parts");
  }
  std::vector<NodeId> train_ids;
  for (const NodeId& id : split.train) {
    if (!isolated(model, id)) train_ids.push_back(id);
  }
  if (train_ids.empty()) throw DataError("every training news node is isolated");

  ParamStore params = model.init_params(cfg.seed);
  Optimizer opt(cfg);
  std::uint64_t eval_seed = derive_seed(cfg.seed, "eval-sampling");

  TrainResult result;
  result.params = params;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, "epoch-shuffle"));

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Fresh instance samples each epoch act as stochastic regularization;
    // evaluation always uses the fixed eval seed.
    std::uint64_t epoch_seed = derive_seed(cfg.seed, "epoch/" + std::to_string(epoch));
    std::shuffle(train_ids.begin(), train_ids.end(), shuffle_rng);

    double train_loss = 0.0;
    for (const auto& batch : make_batches(train_ids, cfg.batch_size)) {
      auto cache = model.forward_batch(batch, params, epoch_seed);
      std::vector<Tensor> dlogits;
      double inv = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        int lab = *model.graph().label(batch[i]);
        train_loss += cross_entropy(cache.probs[i], lab);
        Tensor g = cross_entropy_logit_grad(cache.probs[i], lab);
        g.scale(inv);
        dlogits.push_back(std::move(g));
      }
      model.backward_batch(cache, dlogits, params);
      opt.step(params);
    }
    train_loss /= static_cast<double>(train_ids.size());

    double val_loss = mean_loss(model, params, split.val, eval_seed, cfg.batch_size);
    result.history.push_back(EpochStats{train_loss, val_loss});

    if (val_loss < best_val) {
      best_val = val_loss;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
      if (since_best >= cfg.patience) break;
    }
  }
  return result;
}

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open history file for writing: " + path);
  os << "epoch,train_loss,val_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < history.size(); ++i) {
    os << (i + 1);
    std::snprintf(buf, sizeof(buf), "%.17g", history[i].train_loss);
    os << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", history[i].val_loss);
    os << ',' << buf << '\n';
  }
  if (!os) throw IoError("write failure on history file: " + path);
}

}  // namespace mpfnd
