#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "fixture.hpp"
#include "mpfnd/eval.hpp"
#include "mpfnd/synthgen.hpp"

using namespace mpfnd;

TEST_CASE("metrics hand example") {
  // Scores are P_real; labels Real=0, Fake=1.
  std::vector<double> scores{0.9, 0.8, 0.3};
  std::vector<int> labels{0, 1, 1};
  MetricsReport m = compute_metrics(scores, labels);
  // Predictions at 0.5: real, real, fake. TP=1 FP=1 FN=0 TN=1.
  CHECK(m.precision == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.recall == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  // The real item outranks both fakes: AUC = 1.
  CHECK(m.auc == 1.0);
  CHECK(m.n_pos == 1);
  CHECK(m.n_neg == 2);

  // Perfectly anti-ranked scores give AUC = 0.
  MetricsReport w = compute_metrics({0.1, 0.7, 0.9}, {0, 1, 1});
  CHECK(w.auc == 0.0);

  // All-tied scores give AUC = 0.5 exactly.
  MetricsReport t = compute_metrics({0.4, 0.4, 0.4, 0.4}, {0, 1, 0, 1});
  CHECK(t.auc == 0.5);

  CHECK_THROWS_AS(compute_metrics({0.5}, {0}), DomainError);       // one class only
  CHECK_THROWS_AS(compute_metrics({0.5, 0.2}, {1, 1}), DomainError);
  CHECK_THROWS_AS(compute_metrics({0.5}, {0, 1}), DomainError);
}

TEST_CASE("rank AUC equals the pairwise oracle bit-for-bit, ties included") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> U(0, 1);
  std::uniform_int_distribution<int> L(0, 1);
  std::uniform_int_distribution<int> Q(0, 4);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t n = 5 + rng() % 40;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool both = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Quantized scores force plenty of exact ties.
      scores[i] = (trial % 2 == 0) ? U(rng) : Q(rng) / 4.0;
      labels[i] = L(rng);
    }
    for (std::size_t i = 1; i < n; ++i) both = both || labels[i] != labels[0];
    if (!both) labels[0] = 1 - labels[0];
    MetricsReport m = compute_metrics(scores, labels);
    double oracle = auc_bruteforce(scores, labels);
    CHECK(m.auc == oracle);  // exact equality, not approximate
  }
}

TEST_CASE("AUC complements when all labels flip") {
  std::vector<double> scores{0.9, 0.8, 0.3, 0.55, 0.55, 0.2};
  std::vector<int> labels{0, 1, 1, 0, 1, 0};
  std::vector<int> flipped;
  for (int y : labels) flipped.push_back(1 - y);
  double a = compute_metrics(scores, labels).auc;
  double b = compute_metrics(scores, flipped).auc;
  CHECK(a + b == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("logistic probe separates linearly separable embeddings") {
  HeteroGraph g;
  g.add_node("p", NodeType::Publisher);
  g.add_node("u", NodeType::User);
  std::map<NodeId, Tensor> emb;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> noise(-0.3, 0.3);
  std::vector<NodeId> ids;
  for (int i = 0; i < 80; ++i) {
    NodeId id = "n" + std::to_string(i);
    g.add_node(id, NodeType::News);
    g.set_label(id, i % 2);
    g.add_edge("p", id, EdgeType::Publication);
    double c = (i % 2 == 0) ? 1.0 : -1.0;
    emb[id] = Tensor::vec({c + noise(rng), -c + noise(rng), noise(rng)});
    ids.push_back(id);
  }
  Split split = split_dataset(g, ids, 0.6, 11);
  MetricsReport m = probe_logreg(emb, g, split, 13);
  CHECK(m.accuracy > 0.9);
  CHECK(m.auc > 0.95);

  // Pure-noise embeddings hover near chance.
  std::map<NodeId, Tensor> junk;
  for (const NodeId& id : ids) {
    junk[id] = Tensor::vec({noise(rng), noise(rng), noise(rng)});
  }
  MetricsReport j = probe_logreg(junk, g, split, 13);
  CHECK(j.auc < 0.75);
}

TEST_CASE("model evaluation produces P_real scores deterministically") {
  HeteroGraph g = fixture::example_graph();
  FeatureBundle bundle = fixture::example_bundle(g);
  Model model(g, bundle, fixture::small_config());
  ParamStore params = model.init_params(5);
  std::vector<NodeId> ids{"n1", "n2", "n3", "n4"};
  std::vector<double> s1 = score_news(model, params, ids, 11, 2);
  std::vector<double> s2 = score_news(model, params, ids, 11, 2);
  REQUIRE(s1.size() == 4);
  CHECK(s1 == s2);
  for (double s : s1) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
  MetricsReport m = evaluate_model(model, params, ids, 11, 2);
  CHECK(m.n_pos == 2);
  CHECK(m.n_neg == 2);
  CHECK(m.auc >= 0.0);
  CHECK(m.auc <= 1.0);
}

TEST_CASE("embedding export format") {
  HeteroGraph g;
  g.add_node("p", NodeType::Publisher);
  g.add_node("a", NodeType::News);
  g.add_node("b", NodeType::News);
  g.set_label("a", 1);
  g.add_edge("p", "a", EdgeType::Publication);
  std::map<NodeId, Tensor> emb;
  emb["a"] = Tensor::vec({0.25, -1.0});
  emb["b"] = Tensor::vec({1.0 / 3.0, 2.0});
  std::string path = "emb_test.csv";
  export_embeddings(emb, g, path);
  std::ifstream in(path);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  in.close();
  std::remove(path.c_str());
  CHECK(l1 == "a,1,0.25,-1");
  CHECK(l2.rfind("b,,0.333333333333333", 0) == 0);  // unlabeled -> empty field
}

TEST_CASE("ratio sweep output and csv") {
  std::vector<RatioRow> rows{{0.2, 0.75}, {0.4, 0.8125}};
  std::string path = "ratio_test.csv";
  save_ratio_csv(rows, path);
  std::ifstream in(path);
  std::string header, r1;
  std::getline(in, header);
  std::getline(in, r1);
  in.close();
  std::remove(path.c_str());
  CHECK(header == "ratio,auc");
  CHECK(r1.rfind("0.2,", 0) == 0);
}
