#include "mpfnd/featurize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mpfnd {

const Tensor& FeatureTable::lookup(const NodeId& id) const {
  auto it = vectors.find(id);
  if (it == vectors.end()) throw NotFoundError("no feature vector for node " + id);
  return it->second;
}

FeatureTable load_features(const std::string& path, NodeType node_type) {
  std::ifstream is(path);
  if (!is) throw IngestError("cannot open feature file: " + path);
  FeatureTable table;
  table.node_type = node_type;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) {
      throw IngestError(path + ": row " + std::to_string(row) + ": missing node id");
    }
    NodeId id = cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        vals.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw IngestError(path + ": row " + std::to_string(row) + ": bad real value '" + cell + "'");
      }
    }
    if (vals.empty()) {
      throw IngestError(path + ": row " + std::to_string(row) + ": no value columns");
    }
    if (table.dim == 0) {
      table.dim = vals.size();
    } else if (vals.size() != table.dim) {
      throw IngestError(path + ": row " + std::to_string(row) + ": width " +
                        std::to_string(vals.size()) + " differs from first row width " +
                        std::to_string(table.dim));
    }
    if (table.vectors.count(id)) {
      throw ConflictError(path + ": row " + std::to_string(row) + ": duplicate node id " + id);
    }
    table.vectors.emplace(std::move(id), Tensor::vec(std::move(vals)));
  }
  return table;
}

void save_features(const FeatureTable& table, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open feature file for writing: " + path);
  // Sorted ids keep output stable across runs.
  std::vector<NodeId> ids;
  ids.reserve(table.vectors.size());
  for (const auto& [id, v] : table.vectors) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  char buf[64];
  for (const NodeId& id : ids) {
    os << id;
    const Tensor& v = table.vectors.at(id);
    for (std::size_t i = 0; i < v.numel(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
  if (!os) throw IoError("write failure on feature file: " + path);
}

namespace {
std::uint64_t fnv1a(const std::string& s, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}
}  // namespace

FeatureTable hash_features(const std::map<NodeId, std::string>& texts, NodeType node_type,
                           std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw DomainError("hash_features dim must be at least 8");
  FeatureTable table;
  table.node_type = node_type;
  table.dim = dim;
  for (const auto& [id, text] : texts) {
    Tensor v({dim});
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      std::uint64_t h = fnv1a(token, seed);
      std::size_t bucket = h % dim;
      double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
      v[bucket] += sign;
      token.clear();
    };
    for (char ch : text) {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
      } else {
        flush();
      }
    }
    flush();
    double norm = l2_norm(v);
    if (norm > 0.0) v.scale(1.0 / norm);
    table.vectors.emplace(id, std::move(v));
  }
  return table;
}

FeatureBundle FeatureBundle::bind(const HeteroGraph& g, std::vector<FeatureTable> tables) {
  FeatureBundle bundle;
  for (FeatureTable& t : tables) {
    if (bundle.tables_.count(t.node_type)) {
      throw ConflictError("two feature tables for node type " + to_string(t.node_type));
    }
    bundle.tables_.emplace(t.node_type, std::move(t));
  }
  std::vector<NodeId> missing;
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    const NodeId& id = g.node_id(static_cast<int>(i));
    NodeType t = g.node_type_at(static_cast<int>(i));
    auto it = bundle.tables_.find(t);
    if (it == bundle.tables_.end()) {
      throw CoverageError("no feature table bound for node type " + to_string(t));
    }
    if (!it->second.vectors.count(id)) {
      missing.push_back(id);
    } else {
      bundle.type_of_.emplace(id, t);
    }
  }
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    std::ostringstream os;
    os << missing.size() << " node(s) without features:";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) os << ' ' << missing[i];
    throw CoverageError(os.str());
  }
  return bundle;
}

const Tensor& FeatureBundle::lookup(const NodeId& id) const {
  auto it = type_of_.find(id);
  if (it == type_of_.end()) throw NotFoundError("node not bound in feature bundle: " + id);
  return tables_.at(it->second).lookup(id);
}

std::size_t FeatureBundle::dim_for(NodeType t) const {
  auto it = tables_.find(t);
  if (it == tables_.end()) throw NotFoundError("no feature table for type " + to_string(t));
  return it->second.dim;
}

}  // namespace mpfnd
