#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "fixture.hpp"
#include "mpfnd/synthgen.hpp"
#include "mpfnd/train.hpp"

using namespace mpfnd;

namespace {

HeteroGraph labeled_graph(std::size_t n_real, std::size_t n_fake) {
  HeteroGraph g;
  g.add_node("p", NodeType::Publisher);
  g.add_node("u", NodeType::User);
  std::size_t i = 0;
  for (; i < n_real + n_fake; ++i) {
    NodeId id = "n" + std::to_string(i);
    g.add_node(id, NodeType::News);
    g.set_label(id, i < n_real ? 0 : 1);
    g.add_edge("p", id, EdgeType::Publication);
    g.add_edge("u", id, EdgeType::Tweet, static_cast<std::int64_t>(i));
  }
  return g;
}

}  // namespace

TEST_CASE("split sizes, stratification, and determinism") {
  HeteroGraph g = labeled_graph(700, 354);  // 1054 articles, 70% -> 737 train
  std::vector<NodeId> labeled = g.labeled_news();
  Split s = split_dataset(g, labeled, 0.70, 42);
  CHECK(s.train.size() == 737);
  CHECK(s.val.size() + s.test.size() == 1054 - 737);
  CHECK(static_cast<std::size_t>(
            std::abs(static_cast<long>(s.val.size()) - static_cast<long>(s.test.size()))) <= 1);

  // Disjoint cover.
  std::set<NodeId> all;
  for (const auto& part : {s.train, s.val, s.test}) {
    for (const NodeId& id : part) CHECK(all.insert(id).second);
  }
  CHECK(all.size() == labeled.size());

  // Stratification: per-part fake share within one item of the global share.
  auto fake_count = [&](const std::vector<NodeId>& part) {
    std::size_t k = 0;
    for (const NodeId& id : part) k += static_cast<std::size_t>(*g.label(id));
    return k;
  };
  double global = 354.0 / 1054.0;
  for (const auto& part : {s.train, s.val, s.test}) {
    double expect = global * static_cast<double>(part.size());
    CHECK(std::abs(static_cast<double>(fake_count(part)) - expect) <= 1.0);
  }

  // Determinism and seed sensitivity.
  Split s2 = split_dataset(g, labeled, 0.70, 42);
  CHECK(s2.train == s.train);
  CHECK(s2.val == s.val);
  CHECK(s2.test == s.test);
  Split s3 = split_dataset(g, labeled, 0.70, 43);
  CHECK(s3.train != s.train);

  CHECK_THROWS_AS(split_dataset(g, labeled, 0.0, 42), ConfigError);
  CHECK_THROWS_AS(split_dataset(g, labeled, 1.0, 42), ConfigError);
}

TEST_CASE("cross entropy hand values and logit gradient") {
  // P = (0.5, 0.5): loss is ln 2 for either label.
  Tensor half = Tensor::vec({0.5, 0.5});
  CHECK(cross_entropy(half, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(cross_entropy(half, 1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  Tensor p = Tensor::vec({0.9, 0.1});
  CHECK(cross_entropy(p, 0) == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(cross_entropy(p, 1) == doctest::Approx(-std::log(0.1)).epsilon(1e-12));

  // Clamp keeps a certain-but-wrong prediction finite.
  Tensor sure = Tensor::vec({1.0, 0.0});
  CHECK(cross_entropy(sure, 1) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));

  Tensor grad = cross_entropy_logit_grad(p, 1);
  CHECK(grad[0] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(grad[1] == doctest::Approx(-0.9).epsilon(1e-15));

  CHECK_THROWS_AS(cross_entropy(Tensor::vec({0.3, 0.3}), 0), DomainError);
  CHECK_THROWS_AS(cross_entropy(Tensor::vec({-0.1, 1.1}), 0), DomainError);
  CHECK_THROWS_AS(cross_entropy(half, 2), DomainError);
}

TEST_CASE("SGD and Adam take the expected first steps") {
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.optimizer = OptimizerKind::Sgd;
  ParamStore ps;
  ps.add("w", Tensor::vec({1.0, -2.0}));
  ps.grad("w")[0] = 0.5;
  ps.grad("w")[1] = -1.0;
  Optimizer sgd(cfg);
  sgd.step(ps);
  CHECK(ps.value("w")[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(ps.value("w")[1] == doctest::Approx(-1.9).epsilon(1e-15));
  // Gradients were zeroed by the step.
  CHECK(ps.grad("w")[0] == 0.0);

  // Adam's first bias-corrected step has magnitude lr·g/(|g|+eps) ≈ lr·sign(g).
  cfg.optimizer = OptimizerKind::Adam;
  ParamStore pa;
  pa.add("w", Tensor::vec({1.0, -2.0}));
  pa.grad("w")[0] = 0.5;
  pa.grad("w")[1] = -1.0;
  Optimizer adam(cfg);
  adam.step(pa);
  CHECK(pa.value("w")[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(pa.value("w")[1] == doctest::Approx(-2.0 + 0.1).epsilon(1e-6));

  // NaN gradients abort with the offending tensor named.
  ParamStore pn;
  pn.add("bad_tensor", Tensor::vec({1.0}));
  pn.grad("bad_tensor")[0] = std::nan("");
  Optimizer opt2(cfg);
  try {
    opt2.step(pn);
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("bad_tensor") != std::string::npos);
  }
}

TEST_CASE("Adam minimizes a quadratic") {
  TrainConfig cfg;
  cfg.lr = 0.05;
  cfg.optimizer = OptimizerKind::Adam;
  ParamStore ps;
  ps.add("w", Tensor::vec({3.0, -4.0}));
  Optimizer opt(cfg);
  for (int it = 0; it < 500; ++it) {
    // f = ((w0-1)² + (w1+2)²)/2
    ps.grad("w")[0] = ps.value("w")[0] - 1.0;
    ps.grad("w")[1] = ps.value("w")[1] + 2.0;
    opt.step(ps);
  }
  CHECK(ps.value("w")[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(ps.value("w")[1] == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("training on a separable synthetic graph reduces loss and early-stops") {
  SynthConfig sc;
  sc.n_news = 60;
  sc.n_users = 40;
  sc.n_publishers = 6;
  sc.fake_frac = 0.5;
  sc.feature_signal = 1.0;
  sc.base_rate = 6.0;
  sc.regime = Regime::Misinformation;
  sc.seed = 9;
  SynthData data = generate(sc);
  FeatureBundle bundle = data.bind();

  ModelConfig mc = fixture::small_config();
  mc.temporal_mode = TemporalMode::Attention;
  Model model(data.graph, bundle, mc);
  Split split = split_dataset(data.graph, data.graph.labeled_news(), 0.70, 7);

  TrainConfig tc;
  tc.lr = 3e-3;
  tc.max_epochs = 30;
  tc.patience = 8;
  tc.batch_size = 16;
  tc.seed = 7;
  TrainResult result = train_model(model, split, tc);

  REQUIRE(!result.history.empty());
  CHECK(result.history.size() <= tc.max_epochs);
  double first = result.history.front().train_loss;
  double best_val = result.history[result.best_epoch].val_loss;
  for (const EpochStats& e : result.history) CHECK(best_val <= e.val_loss + 1e-12);
  CHECK(result.history.back().train_loss < first);

  // Determinism: an identical run reproduces the history exactly.
  TrainResult again = train_model(model, split, tc);
  REQUIRE(again.history.size() == result.history.size());
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    CHECK(again.history[i].train_loss == result.history[i].train_loss);
    CHECK(again.history[i].val_loss == result.history[i].val_loss);
  }
  CHECK(again.best_epoch == result.best_epoch);
}

TEST_CASE("early stopping halts after `patience` epochs without improvement") {
  // A tiny graph the model can't really fit: validation loss plateaus fast.
  HeteroGraph g = labeled_graph(6, 6);
  std::map<NodeId, std::string> pubs{{"p", "pub"}};
  std::map<NodeId, std::string> users{{"u", "user"}};
  std::map<NodeId, std::string> news;
  for (std::size_t i = 0; i < 12; ++i) news["n" + std::to_string(i)] = "body";
  std::vector<FeatureTable> tables;
  tables.push_back(hash_features(pubs, NodeType::Publisher, 9, 7));
  tables.push_back(hash_features(news, NodeType::News, 12, 7));
  tables.push_back(hash_features(users, NodeType::User, 10, 7));
  FeatureBundle bundle = FeatureBundle::bind(g, std::move(tables));

  Model model(g, bundle, fixture::small_config());
  Split split = split_dataset(g, g.labeled_news(), 0.5, 3);
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.max_epochs = 200;
  tc.patience = 5;
  tc.batch_size = 0;
  tc.seed = 3;
  TrainResult result = train_model(model, split, tc);
  CHECK(result.history.size() < tc.max_epochs);
  CHECK(result.history.size() >= result.best_epoch + tc.patience);
}

TEST_CASE("train config validation") {
  TrainConfig tc;
  tc.lr = 0.0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.train_frac = 1.5;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.max_epochs = 0;
  CHECK_THROWS_AS(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.validate();
}
