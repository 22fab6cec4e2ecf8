#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpfnd/hetgraph.hpp"

namespace mpfnd {

// The two length-3 schemas: news-publisher-news and news-user-news.
enum class MetaPathSchema { PS, PU };

std::string to_string(MetaPathSchema s);

// Ordered triple (u, w, v): other news u reached from target v through the
// middle node w. PU instances carry the timestamp of the w→v tweet edge.
struct MetaPathInstance {
  NodeId u;
  NodeId w;
  NodeId v;
  MetaPathSchema schema = MetaPathSchema::PS;
  std::optional<std::int64_t> timestamp;

  bool operator==(const MetaPathInstance& o) const {
    return u == o.u && w == o.w && v == o.v && schema == o.schema && timestamp == o.timestamp;
  }
};

// Every (u, w, target) with w adjacent to both u and target through the
// schema relation, u != target. Duplicate triples are collapsed; a repeated
// w→target tweet keeps the earliest timestamp. Output sorted by (w, u).
std::vector<MetaPathInstance> enumerate_instances(const HeteroGraph& g, const NodeId& target,
                                                  MetaPathSchema schema);

// Uniform sample without replacement of min(n, pool) instances.
std::vector<MetaPathInstance> sample_instances(const std::vector<MetaPathInstance>& instances,
                                               std::size_t n, std::uint64_t seed);

// Stable ascending sort by timestamp; PU instances only.
std::vector<MetaPathInstance> sort_chronological(std::vector<MetaPathInstance> instances);

}  // namespace mpfnd
