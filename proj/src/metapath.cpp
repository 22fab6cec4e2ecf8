#include "mpfnd/metapath.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "mpfnd/numerics.hpp"

namespace mpfnd {

std::string to_string(MetaPathSchema s) { return s == MetaPathSchema::PS ? "PS" : "PU"; }

std::vector<MetaPathInstance> enumerate_instances(const HeteroGraph& g, const NodeId& target,
                                                  MetaPathSchema schema) {
  int v = g.node_index(target);
  if (g.node_type_at(v) != NodeType::News) {
    throw SchemaError("meta-path target must be a news node: " + target);
  }
  EdgeType rel = schema == MetaPathSchema::PS ? EdgeType::Publication : EdgeType::Tweet;

  // Middle nodes adjacent to the target through the schema relation; for PU
  // keep the earliest tweet time per user.
  std::map<int, std::optional<std::int64_t>> middles;
  for (int e : g.in_edges(v)) {
    const Edge& edge = g.edges()[static_cast<std::size_t>(e)];
    if (edge.type != rel) continue;
    auto it = middles.find(edge.src);
    if (it == middles.end()) {
      middles.emplace(edge.src, edge.ts);
    } else if (edge.ts.has_value() && (!it->second.has_value() || *edge.ts < *it->second)) {
      it->second = edge.ts;
    }
  }

  std::vector<MetaPathInstance> out;
  for (const auto& [w, ts] : middles) {
    // Other news reached from the middle node; duplicate (u, w) collapsed.
    std::vector<int> others;
    for (int e : g.out_edges(w)) {
      const Edge& edge = g.edges()[static_cast<std::size_t>(e)];
      if (edge.type != rel || edge.dst == v) continue;
      others.push_back(edge.dst);
    }
    std::sort(others.begin(), others.end());
    others.erase(std::unique(others.begin(), others.end()), others.end());
    for (int u : others) {
      out.push_back(MetaPathInstance{g.node_id(u), g.node_id(w), target, schema, ts});
    }
  }
  std::sort(out.begin(), out.end(), [](const MetaPathInstance& a, const MetaPathInstance& b) {
    return a.w != b.w ? a.w < b.w : a.u < b.u;
  });
  return out;
}

std::vector<MetaPathInstance> sample_instances(const std::vector<MetaPathInstance>& instances,
                                               std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("sample_instances requires n >= 1");
  if (instances.size() <= n) return instances;
  std::vector<std::size_t> idx(instances.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: only the first n positions are needed.
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());  // keep the pool's deterministic order
  std::vector<MetaPathInstance> out;
  out.reserve(n);
  for (std::size_t i : idx) out.push_back(instances[i]);
  return out;
}

std::vector<MetaPathInstance> sort_chronological(std::vector<MetaPathInstance> instances) {
  for (const MetaPathInstance& p : instances) {
    if (p.schema != MetaPathSchema::PU) {
      throw SchemaError("sort_chronological accepts PU instances only");
    }
    if (!p.timestamp.has_value()) {
      throw SchemaError("PU instance without timestamp: " + p.u + "/" + p.w + "/" + p.v);
    }
  }
  std::stable_sort(instances.begin(), instances.end(),
                   [](const MetaPathInstance& a, const MetaPathInstance& b) {
                     return *a.timestamp < *b.timestamp;
                   });
  return instances;
}

}  // namespace mpfnd
