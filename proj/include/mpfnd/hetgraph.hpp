#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpfnd/errors.hpp"

namespace mpfnd {

using NodeId = std::string;

enum class NodeType { Publisher, News, User };
enum class EdgeType { Citation, Publication, Tweet, Following };

std::string to_string(NodeType t);
std::string to_string(EdgeType t);
NodeType node_type_from_string(const std::string& s);
EdgeType edge_type_from_string(const std::string& s);

struct Edge {
  int src = -1;
  int dst = -1;
  EdgeType type = EdgeType::Citation;
  std::optional<std::int64_t> ts;  // seconds since epoch; Tweet edges only
};

// Typed heterogeneous graph of publishers, news, and users. Node ids are
// opaque strings remapped to dense indices internally; the id↔index table is
// persistent so exports stay stable. Mutable during ingestion, frozen
// (read-only shareable) afterwards.
class HeteroGraph {
 public:
  void add_node(const NodeId& id, NodeType type);
  // `bidirectional` stores the reverse edge as well (Citation/Following only).
  void add_edge(const NodeId& src, const NodeId& dst, EdgeType type,
                std::optional<std::int64_t> ts = std::nullopt, bool bidirectional = false);
  void set_label(const NodeId& news_id, int label);  // Real=0, Fake=1

  bool has_node(const NodeId& id) const { return index_.count(id) > 0; }
  int node_index(const NodeId& id) const;
  const NodeId& node_id(int idx) const { return ids_.at(static_cast<std::size_t>(idx)); }
  NodeType node_type(const NodeId& id) const;
  NodeType node_type_at(int idx) const { return types_.at(static_cast<std::size_t>(idx)); }

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeId>& node_ids() const { return ids_; }

  std::optional<int> label(const NodeId& news_id) const;
  const std::unordered_map<int, int>& labels_by_index() const { return labels_; }
  std::vector<NodeId> labeled_news() const;

  // Edge indices incident to node idx, by direction.
  const std::vector<int>& out_edges(int idx) const { return out_adj_.at(static_cast<std::size_t>(idx)); }
  const std::vector<int>& in_edges(int idx) const { return in_adj_.at(static_cast<std::size_t>(idx)); }

  // Re-checks every edge signature and the |A|+|R| > 2 heterogeneity rule.
  void validate() const;

  // Retains exactly the nodes whose type is in `types` and edges with both
  // endpoints retained; labels carried over for retained news.
  HeteroGraph project_subgraph(const std::set<NodeType>& types) const;

  // JSON-lines persistence; see the format note in save_graph.
  static HeteroGraph load(const std::string& path);
  void save(const std::string& path) const;

 private:
  static void check_signature(NodeType src, NodeType dst, EdgeType type);

  std::unordered_map<NodeId, int> index_;
  std::vector<NodeId> ids_;
  std::vector<NodeType> types_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_adj_, in_adj_;
  std::unordered_map<int, int> labels_;  // node index -> {0,1}
};

}  // namespace mpfnd
