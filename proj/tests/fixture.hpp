#pragma once

// Shared worked-example graph: 2 publishers, 4 news, 3 users. Target n2 has
// exactly two publisher-path instances {(n1,p1,n2), (n3,p2,n2)} and two
// user-path instances {(n3,u1,n2), (n4,u2,n2)}.

#include <map>

#include "mpfnd/featurize.hpp"
#include "mpfnd/hetgraph.hpp"
#include "mpfnd/model.hpp"

namespace fixture {

inline mpfnd::HeteroGraph example_graph() {
  using namespace mpfnd;
  HeteroGraph g;
  g.add_node("p1", NodeType::Publisher);
  g.add_node("p2", NodeType::Publisher);
  for (const char* n : {"n1", "n2", "n3", "n4"}) g.add_node(n, NodeType::News);
  for (const char* u : {"u1", "u2", "u3"}) g.add_node(u, NodeType::User);
  g.set_label("n1", 0);
  g.set_label("n2", 1);
  g.set_label("n3", 0);
  g.set_label("n4", 1);
  g.add_edge("p1", "n1", EdgeType::Publication);
  g.add_edge("p1", "n2", EdgeType::Publication);
  g.add_edge("p2", "n2", EdgeType::Publication);
  g.add_edge("p2", "n3", EdgeType::Publication);
  g.add_edge("u1", "n2", EdgeType::Tweet, 200);
  g.add_edge("u1", "n3", EdgeType::Tweet, 150);
  g.add_edge("u2", "n2", EdgeType::Tweet, 100);
  g.add_edge("u2", "n4", EdgeType::Tweet, 120);
  g.add_edge("u3", "n4", EdgeType::Tweet, 300);
  g.add_edge("u3", "n1", EdgeType::Tweet, 90);
  g.add_edge("p1", "p2", EdgeType::Citation, std::nullopt, true);
  g.add_edge("u1", "u2", EdgeType::Following);
  g.add_edge("u3", "u1", EdgeType::Following);
  return g;
}

inline mpfnd::FeatureBundle example_bundle(const mpfnd::HeteroGraph& g) {
  using namespace mpfnd;
  std::map<NodeId, std::string> pubs, news, users;
  for (const char* p : {"p1", "p2"}) pubs[p] = std::string("outlet profile for ") + p;
  for (const char* n : {"n1", "n2", "n3", "n4"}) news[n] = std::string("article body about ") + n;
  for (const char* u : {"u1", "u2", "u3"}) users[u] = std::string("user bio of ") + u;
  std::vector<FeatureTable> tables;
  tables.push_back(hash_features(pubs, NodeType::Publisher, 9, 7));
  tables.push_back(hash_features(news, NodeType::News, 12, 7));
  tables.push_back(hash_features(users, NodeType::User, 10, 7));
  return FeatureBundle::bind(g, std::move(tables));
}

inline mpfnd::ModelConfig small_config() {
  mpfnd::ModelConfig cfg;
  cfg.d_hidden = 8;
  cfg.heads = 2;
  cfg.d_semantic = 6;
  cfg.ps_samples = 4;
  cfg.pu_samples = 4;
  cfg.conve.channels = 2;
  cfg.conve.reshape_rows = 2;  // stack 8x4 with 3x3 kernels
  return cfg;
}

}  // namespace fixture
