#pragma once

#include <map>
#include <string>
#include <unordered_map>

#include "mpfnd/hetgraph.hpp"
#include "mpfnd/tensor.hpp"

namespace mpfnd {

// Initial node feature vectors for one node type. Per-type dimensions may
// differ; the model's type-specific transform absorbs the mismatch.
struct FeatureTable {
  NodeType node_type = NodeType::News;
  std::size_t dim = 0;
  std::unordered_map<NodeId, Tensor> vectors;

  const Tensor& lookup(const NodeId& id) const;
};

// CSV: first column node id, remaining columns decimal reals; no header.
FeatureTable load_features(const std::string& path, NodeType node_type);
void save_features(const FeatureTable& table, const std::string& path);

// Deterministic hashed-bag-of-tokens fallback: lowercase, split on
// non-alphanumerics, signed bucket accumulation, L2-normalized.
FeatureTable hash_features(const std::map<NodeId, std::string>& texts, NodeType node_type,
                           std::size_t dim, std::uint64_t seed);

// One feature table per node type present in the bound graph, with coverage
// checked at bind time.
class FeatureBundle {
 public:
  static FeatureBundle bind(const HeteroGraph& g, std::vector<FeatureTable> tables);

  const Tensor& lookup(const NodeId& id) const;
  std::size_t dim_for(NodeType t) const;
  bool has_type(NodeType t) const { return tables_.count(t) > 0; }
  const std::map<NodeType, FeatureTable>& tables() const { return tables_; }

 private:
  std::map<NodeType, FeatureTable> tables_;
  std::unordered_map<NodeId, NodeType> type_of_;
};

}  // namespace mpfnd
