#include "mpfnd/hetgraph.hpp"

#include <fstream>
#include <json.hpp>

namespace mpfnd {

using nlohmann::json;

std::string to_string(NodeType t) {
  switch (t) {
    case NodeType::Publisher: return "publisher";
    case NodeType::News: return "news";
    case NodeType::User: return "user";
  }
  return "?";
}

std::string to_string(EdgeType t) {
  switch (t) {
    case EdgeType::Citation: return "citation";
    case EdgeType::Publication: return "publication";
    case EdgeType::Tweet: return "tweet";
    case EdgeType::Following: return "following";
  }
  return "?";
}

NodeType node_type_from_string(const std::string& s) {
  if (s == "publisher") return NodeType::Publisher;
  if (s == "news") return NodeType::News;
  if (s == "user") return NodeType::User;
  throw SchemaError("unknown node type: " + s);
}

EdgeType edge_type_from_string(const std::string& s) {
  if (s == "citation") return EdgeType::Citation;
  if (s == "publication") return EdgeType::Publication;
  if (s == "tweet") return EdgeType::Tweet;
  if (s == "following") return EdgeType::Following;
  throw SchemaError("unknown edge type: " + s);
}

void HeteroGraph::add_node(const NodeId& id, NodeType type) {
  if (index_.count(id)) throw ConflictError("duplicate node id: " + id);
  int idx = static_cast<int>(ids_.size());
  index_.emplace(id, idx);
  ids_.push_back(id);
  types_.push_back(type);
  out_adj_.emplace_back();
  in_adj_.emplace_back();
}

void HeteroGraph::check_signature(NodeType src, NodeType dst, EdgeType type) {
  bool ok = false;
  switch (type) {
    case EdgeType::Citation: ok = src == NodeType::Publisher && dst == NodeType::Publisher; break;
    case EdgeType::Publication: ok = src == NodeType::Publisher && dst == NodeType::News; break;
    case EdgeType::Tweet: ok = src == NodeType::User && dst == NodeType::News; break;
    case EdgeType::Following: ok = src == NodeType::User && dst == NodeType::User; break;
  }
  if (!ok) {
    throw SchemaError("edge type " + to_string(type) + " does not accept endpoints (" +
                      to_string(src) + ", " + to_string(dst) + ")");
  }
}

void HeteroGraph::add_edge(const NodeId& src, const NodeId& dst, EdgeType type,
                           std::optional<std::int64_t> ts, bool bidirectional) {
  auto si = index_.find(src);
  auto di = index_.find(dst);
  if (si == index_.end()) throw NotFoundError("edge source not found: " + src);
  if (di == index_.end()) throw NotFoundError("edge target not found: " + dst);
  check_signature(types_[static_cast<std::size_t>(si->second)],
                  types_[static_cast<std::size_t>(di->second)], type);
  if (type == EdgeType::Tweet && !ts.has_value()) {
    throw SchemaError("tweet edge " + src + "->" + dst + " requires a timestamp");
  }
  if (type != EdgeType::Tweet && ts.has_value()) {
    throw SchemaError(to_string(type) + " edge " + src + "->" + dst + " must not carry a timestamp");
  }
  if (bidirectional && (type == EdgeType::Publication || type == EdgeType::Tweet)) {
    throw SchemaError(to_string(type) + " edges cannot be bidirectional");
  }
  int e = static_cast<int>(edges_.size());
  edges_.push_back(Edge{si->second, di->second, type, ts});
  out_adj_[static_cast<std::size_t>(si->second)].push_back(e);
  in_adj_[static_cast<std::size_t>(di->second)].push_back(e);
  if (bidirectional) {
    int e2 = static_cast<int>(edges_.size());
    edges_.push_back(Edge{di->second, si->second, type, ts});
    out_adj_[static_cast<std::size_t>(di->second)].push_back(e2);
    in_adj_[static_cast<std::size_t>(si->second)].push_back(e2);
  }
}

void HeteroGraph::set_label(const NodeId& news_id, int label) {
  int idx = node_index(news_id);
  if (types_[static_cast<std::size_t>(idx)] != NodeType::News) {
    throw SchemaError("labels attach to news nodes only: " + news_id);
  }
  if (label != 0 && label != 1) throw DomainError("label must be 0 (real) or 1 (fake)");
  auto it = labels_.find(idx);
  if (it != labels_.end() && it->second != label) {
    throw ConflictError("conflicting label for " + news_id);
  }
  labels_[idx] = label;
}

int HeteroGraph::node_index(const NodeId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError("no node named " + id);
  return it->second;
}

NodeType HeteroGraph::node_type(const NodeId& id) const {
  return types_[static_cast<std::size_t>(node_index(id))];
}

std::optional<int> HeteroGraph::label(const NodeId& news_id) const {
  auto it = labels_.find(node_index(news_id));
  if (it == labels_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> HeteroGraph::labeled_news() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (labels_.count(static_cast<int>(i))) out.push_back(ids_[i]);
  }
  return out;
}

void HeteroGraph::validate() const {
  std::set<NodeType> nt;
  std::set<EdgeType> et;
  for (NodeType t : types_) nt.insert(t);
  for (const Edge& e : edges_) {
    check_signature(types_[static_cast<std::size_t>(e.src)],
                    types_[static_cast<std::size_t>(e.dst)], e.type);
    if (e.type == EdgeType::Tweet && !e.ts.has_value()) throw SchemaError("tweet edge without timestamp");
    if (e.type != EdgeType::Tweet && e.ts.has_value()) throw SchemaError("timestamp on non-tweet edge");
    et.insert(e.type);
  }
  if (!ids_.empty() && nt.size() + et.size() <= 2) {
    throw SchemaError("graph is not heterogeneous: |node types| + |edge types| must exceed 2");
  }
  for (const auto& [idx, label] : labels_) {
    if (types_[static_cast<std::size_t>(idx)] != NodeType::News) {
      throw SchemaError("label on non-news node " + ids_[static_cast<std::size_t>(idx)]);
    }
  }
}

HeteroGraph HeteroGraph::project_subgraph(const std::set<NodeType>& types) const {
  if (types.empty()) throw DomainError("project_subgraph requires at least one node type");
  HeteroGraph out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (types.count(types_[i])) out.add_node(ids_[i], types_[i]);
  }
  for (const Edge& e : edges_) {
    const NodeId& s = ids_[static_cast<std::size_t>(e.src)];
    const NodeId& d = ids_[static_cast<std::size_t>(e.dst)];
    if (out.has_node(s) && out.has_node(d)) out.add_edge(s, d, e.type, e.ts);
  }
  for (const auto& [idx, label] : labels_) {
    const NodeId& id = ids_[static_cast<std::size_t>(idx)];
    if (out.has_node(id)) out.set_label(id, label);
  }
  return out;
}

// JSON-lines format, one record per line:
//   {"kind":"node","id":"n1","type":"news","label":0}
//   {"kind":"edge","src":"u1","dst":"n1","type":"tweet","ts":1500000000}
// Optional "bidir":true on citation/following edges. Unknown keys rejected;
// node records must precede the edges that reference them.
HeteroGraph HeteroGraph::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IngestError("cannot open graph file: " + path);
  HeteroGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw IngestError(path + ":" + std::to_string(lineno) + ": JSON parse error: " + e.what());
    }
    try {
      if (!rec.is_object() || !rec.contains("kind")) throw SchemaError("record missing \"kind\"");
      std::string kind = rec.at("kind").get<std::string>();
      if (kind == "node") {
        for (auto& [k, v] : rec.items()) {
          if (k != "kind" && k != "id" && k != "type" && k != "label") {
            throw SchemaError("unknown key in node record: " + k);
          }
        }
        NodeId id = rec.at("id").get<std::string>();
        NodeType t = node_type_from_string(rec.at("type").get<std::string>());
        g.add_node(id, t);
        if (rec.contains("label")) g.set_label(id, rec.at("label").get<int>());
      } else if (kind == "edge") {
        for (auto& [k, v] : rec.items()) {
          if (k != "kind" && k != "src" && k != "dst" && k != "type" && k != "ts" && k != "bidir") {
            throw SchemaError("unknown key in edge record: " + k);
          }
        }
        EdgeType t = edge_type_from_string(rec.at("type").get<std::string>());
        std::optional<std::int64_t> ts;
        if (rec.contains("ts")) ts = rec.at("ts").get<std::int64_t>();
        bool bidir = rec.value("bidir", false);
        g.add_edge(rec.at("src").get<std::string>(), rec.at("dst").get<std::string>(), t, ts, bidir);
      } else {
        throw SchemaError("unknown record kind: " + kind);
      }
    } catch (const json::exception& e) {
      throw IngestError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw IngestError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  g.validate();
  return g;
}

void HeteroGraph::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open graph file for writing: " + path);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    json rec{{"kind", "node"}, {"id", ids_[i]}, {"type", to_string(types_[i])}};
    auto it = labels_.find(static_cast<int>(i));
    if (it != labels_.end()) rec["label"] = it->second;
    os << rec.dump() << "\n";
  }
  for (const Edge& e : edges_) {
    json rec{{"kind", "edge"},
             {"src", ids_[static_cast<std::size_t>(e.src)]},
             {"dst", ids_[static_cast<std::size_t>(e.dst)]},
             {"type", to_string(e.type)}};
    if (e.ts.has_value()) rec["ts"] = *e.ts;
    os << rec.dump() << "\n";
  }
  if (!os) throw IoError("write failure on graph file: " + path);
}

}  // namespace mpfnd
