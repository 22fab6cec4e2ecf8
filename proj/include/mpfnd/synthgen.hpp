#pragma once

#include "mpfnd/featurize.hpp"
#include "mpfnd/hetgraph.hpp"

namespace mpfnd {

enum class Regime { Disinformation, Misinformation };

Regime regime_from_string(const std::string& s);
std::string to_string(Regime r);

// Labeled synthetic news graphs. The fake class either re-ignites in
// periodic engagement spikes (disinformation) or decays exactly like real
// news (misinformation). Two signal routes are controlled independently:
//   * feature_signal adds a class-correlated component to news features and
//     skews instigator engagement toward fake news;
//   * the disinformation regime moves instigator engagement times onto the
//     spike schedule while keeping per-class engagement composition equal,
//     so with feature_signal = 0 the only fake/real difference is temporal.
struct SynthConfig {
  std::size_t n_news = 500;
  std::size_t n_users = 5000;
  std::size_t n_publishers = 20;
  double fake_frac = 0.4;
  Regime regime = Regime::Disinformation;
  std::size_t horizon_hours = 500;
  std::size_t spike_period_hours = 72;
  double base_rate = 30.0;          // mean tweet engagements per news
  double instigator_frac = 0.05;    // fraction of users who are instigators
  double instigator_share = 0.4;    // fraction of a news item's engagements from instigators
  double publisher_bias_strength = 0.0;  // in [0,1]
  double feature_signal = 0.0;
  double decay_tau_hours = 24.0;
  std::size_t news_dim = 64;
  std::size_t user_dim = 96;
  std::size_t publisher_dim = 96;
  std::uint64_t seed = 42;

  void validate() const;
  void save(const std::string& path) const;
  static SynthConfig load(const std::string& path);
};

struct SynthData {
  HeteroGraph graph;
  std::vector<FeatureTable> tables;
  std::vector<double> news_pub_time_hours;  // per news index order n0, n1, ...

  FeatureBundle bind() const { return FeatureBundle::bind(graph, tables); }
};

SynthData generate(const SynthConfig& config);

// Expected counts and timing parameters for report headers; round-trips
// through the flat key=value config format.
struct SynthSummary {
  std::string regime;
  std::size_t n_news = 0, n_fake = 0, n_users = 0, n_instigators = 0, n_publishers = 0;
  std::size_t horizon_hours = 0, spike_period_hours = 0;
  double base_rate = 0.0, decay_tau_hours = 0.0;
  std::uint64_t seed = 0;

  void save(const std::string& path) const;
  static SynthSummary load(const std::string& path);
  bool operator==(const SynthSummary&) const = default;
};

SynthSummary describe(const SynthConfig& config);

}  // namespace mpfnd
