#include "mpfnd/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mpfnd/numerics.hpp"

namespace mpfnd {

Regime regime_from_string(const std::string& s) {
  if (s == "disinformation") return Regime::Disinformation;
  if (s == "misinformation") return Regime::Misinformation;
  throw ConfigError("unknown regime: " + s);
}

std::string to_string(Regime r) {
  return r == Regime::Disinformation ? "disinformation" : "misinformation";
}

void SynthConfig::validate() const {
  if (n_news == 0 || n_users == 0 || n_publishers == 0) {
    throw ConfigError("node counts must be positive");
  }
  if (!(fake_frac > 0.0 && fake_frac < 1.0)) throw ConfigError("fake_frac must be in (0,1)");
  if (regime == Regime::Disinformation && horizon_hours < 2 * spike_period_hours) {
    throw ConfigError("disinformation horizon must cover at least two spike periods");
  }
  if (!(base_rate > 0.0)) throw ConfigError("base_rate must be positive");
  if (!(instigator_frac > 0.0 && instigator_frac < 1.0)) {
    throw ConfigError("instigator_frac must be in (0,1)");
  }
  if (!(instigator_share >= 0.0 && instigator_share < 1.0)) {
    throw ConfigError("instigator_share must be in [0,1)");
  }
  if (!(publisher_bias_strength >= 0.0 && publisher_bias_strength <= 1.0)) {
    throw ConfigError("publisher_bias_strength must be in [0,1]");
  }
  if (!(decay_tau_hours > 0.0)) throw ConfigError("decay_tau_hours must be positive");
  if (news_dim < 8 || user_dim < 8 || publisher_dim < 8) {
    throw ConfigError("feature dims must be at least 8");
  }
}

// ---------------------------------------------------------------------------
// Flat key=value config format
// ---------------------------------------------------------------------------

namespace {
std::map<std::string, std::string> parse_kv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IngestError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string trimmed = strip(line);
    if (trimmed.empty()) continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw IngestError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[strip(trimmed.substr(0, eq))] = strip(trimmed.substr(eq + 1));
  }
  return kv;
}
}  // namespace

void SynthConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open config file for writing: " + path);
  os << "n_news=" << n_news << "\n"
     << "n_users=" << n_users << "\n"
     << "n_publishers=" << n_publishers << "\n"
     << "fake_frac=" << fake_frac << "\n"
     << "regime=" << to_string(regime) << "\n"
     << "horizon_hours=" << horizon_hours << "\n"
     << "spike_period_hours=" << spike_period_hours << "\n"
     << "base_rate=" << base_rate << "\n"
     << "instigator_frac=" << instigator_frac << "\n"
     << "instigator_share=" << instigator_share << "\n"
     << "publisher_bias_strength=" << publisher_bias_strength << "\n"
     << "feature_signal=" << feature_signal << "\n"
     << "decay_tau_hours=" << decay_tau_hours << "\n"
     << "news_dim=" << news_dim << "\n"
     << "user_dim=" << user_dim << "\n"
     << "publisher_dim=" << publisher_dim << "\n"
     << "seed=" << seed << "\n";
}

SynthConfig SynthConfig::load(const std::string& path) {
  auto kv = parse_kv(path);
  SynthConfig c;
  for (const auto& [key, value] : kv) {
    try {
      if (key == "n_news") c.n_news = std::stoull(value);
      else if (key == "n_users") c.n_users = std::stoull(value);
      else if (key == "n_publishers") c.n_publishers = std::stoull(value);
      else if (key == "fake_frac") c.fake_frac = std::stod(value);
      else if (key == "regime") c.regime = regime_from_string(value);
      else if (key == "horizon_hours") c.horizon_hours = std::stoull(value);
      else if (key == "spike_period_hours") c.spike_period_hours = std::stoull(value);
      else if (key == "base_rate") c.base_rate = std::stod(value);
      else if (key == "instigator_frac") c.instigator_frac = std::stod(value);
      else if (key == "instigator_share") c.instigator_share = std::stod(value);
      else if (key == "publisher_bias_strength") c.publisher_bias_strength = std::stod(value);
      else if (key == "feature_signal") c.feature_signal = std::stod(value);
      else if (key == "decay_tau_hours") c.decay_tau_hours = std::stod(value);
      else if (key == "news_dim") c.news_dim = std::stoull(value);
      else if (key == "user_dim") c.user_dim = std::stoull(value);
      else if (key == "publisher_dim") c.publisher_dim = std::stoull(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw IngestError(path + ": bad value for " + key + ": " + value);
    }
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

namespace {
std::string make_id(const char* prefix, std::size_t i) { return prefix + std::to_string(i); }

// Deterministic unit direction vector for feature offsets.
Tensor unit_direction(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Tensor v({dim});
  for (std::size_t i = 0; i < dim; ++i) v[i] = nd(rng);
  v.scale(1.0 / l2_norm(v));
  return v;
}

void offset_and_renormalize(Tensor& v, const Tensor& dir, double scale) {
  v.add_scaled(dir, scale);
  double n = l2_norm(v);
  if (n > 0.0) v.scale(1.0 / n);
}

std::string random_profile(const char* role, std::size_t idx, std::mt19937_64& rng) {
  static const char* kTopics[] = {"politics", "health",  "economy", "sports",  "science",
                                  "culture",  "weather", "local",   "finance", "travel",
                                  "energy",   "courts",  "schools", "housing", "media"};
  std::uniform_int_distribution<std::size_t> pick(0, std::size(kTopics) - 1);
  std::uniform_int_distribution<int> count(3, 7);
  std::ostringstream os;
  os << role << ' ' << idx;
  int n = count(rng);
  for (int i = 0; i < n; ++i) os << ' ' << kTopics[pick(rng)];
  return os.str();
}
}  // namespace

SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthData out;
  HeteroGraph& g = out.graph;

  std::size_t n_fake = static_cast<std::size_t>(std::lround(cfg.fake_frac * static_cast<double>(cfg.n_news)));
  std::size_t n_inst = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    std::lround(cfg.instigator_frac * static_cast<double>(cfg.n_users))));
  std::size_t n_biased = std::max<std::size_t>(1, cfg.n_publishers / 2);

  // Node labels: n_fake ones shuffled over the news indices.
  std::vector<int> labels(cfg.n_news, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_fake), 1);
  std::mt19937_64 label_rng(derive_seed(cfg.seed, "labels"));
  std::shuffle(labels.begin(), labels.end(), label_rng);

  for (std::size_t i = 0; i < cfg.n_publishers; ++i) g.add_node(make_id("p", i), NodeType::Publisher);
  for (std::size_t i = 0; i < cfg.n_news; ++i) {
    g.add_node(make_id("n", i), NodeType::News);
    g.set_label(make_id("n", i), labels[i]);
  }
  for (std::size_t i = 0; i < cfg.n_users; ++i) g.add_node(make_id("u", i), NodeType::User);

  // Publication edges: biased publishers (indices < n_biased) attract fake
  // news with probability lifted by bias_strength.
  std::mt19937_64 pub_rng(derive_seed(cfg.seed, "publication"));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < cfg.n_news; ++i) {
    double p_biased = labels[i] == 1 ? 0.5 + 0.5 * cfg.publisher_bias_strength
                                     : 0.5 - 0.5 * cfg.publisher_bias_strength;
    std::size_t pub;
    if (unif(pub_rng) < p_biased) {
      pub = std::uniform_int_distribution<std::size_t>(0, n_biased - 1)(pub_rng);
    } else {
      pub = n_biased < cfg.n_publishers
                ? std::uniform_int_distribution<std::size_t>(n_biased, cfg.n_publishers - 1)(pub_rng)
                : std::uniform_int_distribution<std::size_t>(0, cfg.n_publishers - 1)(pub_rng);
    }
    g.add_edge(make_id("p", pub), make_id("n", i), EdgeType::Publication);
  }

  // Tweet engagements. Composition (instigator share) is identical for both
  // classes unless feature_signal skews it; the disinformation regime moves
  // instigator engagement *times* for fake news onto the spike schedule.
  std::mt19937_64 eng_rng(derive_seed(cfg.seed, "engagement"));
  std::exponential_distribution<double> decay(1.0 / cfg.decay_tau_hours);
  std::normal_distribution<double> spike_jitter(0.0, 1.5);
  double horizon = static_cast<double>(cfg.horizon_hours);
  std::size_t n_spikes = cfg.spike_period_hours > 0
                             ? std::max<std::size_t>(1, cfg.horizon_hours / cfg.spike_period_hours)
                             : 1;
  out.news_pub_time_hours.resize(cfg.n_news);
  for (std::size_t i = 0; i < cfg.n_news; ++i) {
    double t_pub = unif(eng_rng) * horizon / 5.0;
    out.news_pub_time_hours[i] = t_pub;
    std::size_t n_eng = std::max<std::size_t>(
        1, std::poisson_distribution<std::size_t>(cfg.base_rate)(eng_rng));
    bool fake = labels[i] == 1;
    double q = cfg.instigator_share;
    if (cfg.feature_signal > 0.0) {
      q = fake ? std::min(0.9, q * (1.0 + cfg.feature_signal))
               : q * std::max(0.0, 1.0 - 0.5 * cfg.feature_signal);
    }
    for (std::size_t e = 0; e < n_eng; ++e) {
      bool from_instigator = unif(eng_rng) < q;
      std::size_t user = from_instigator
                             ? std::uniform_int_distribution<std::size_t>(0, n_inst - 1)(eng_rng)
                             : std::uniform_int_distribution<std::size_t>(n_inst, cfg.n_users - 1)(eng_rng);
      double offset;
      if (fake && from_instigator && cfg.regime == Regime::Disinformation) {
        std::size_t k = std::uniform_int_distribution<std::size_t>(1, n_spikes)(eng_rng);
        offset = static_cast<double>(k * cfg.spike_period_hours) + spike_jitter(eng_rng);
        offset = std::max(0.0, offset);
      } else {
        offset = std::min(decay(eng_rng), horizon);
      }
      auto ts = static_cast<std::int64_t>(std::llround((t_pub + offset) * 3600.0));
      g.add_edge(make_id("u", user), make_id("n", i), EdgeType::Tweet, ts);
    }
  }

  // Social edges by preferential attachment (heavy-tailed follower counts).
  std::mt19937_64 soc_rng(derive_seed(cfg.seed, "social"));
  {
    std::vector<std::size_t> endpoints{0};
    for (std::size_t u = 1; u < cfg.n_users; ++u) {
      std::size_t m = std::min<std::size_t>(2, u);
      for (std::size_t e = 0; e < m; ++e) {
        std::size_t target;
        if (unif(soc_rng) < 0.25) {
          target = std::uniform_int_distribution<std::size_t>(0, u - 1)(soc_rng);
        } else {
          target = endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(soc_rng)];
        }
        g.add_edge(make_id("u", u), make_id("u", target), EdgeType::Following);
        endpoints.push_back(target);
      }
      endpoints.push_back(u);
    }
  }
  if (cfg.n_publishers > 1) {
    std::vector<std::size_t> endpoints{0};
    for (std::size_t p = 1; p < cfg.n_publishers; ++p) {
      std::size_t target = endpoints[std::uniform_int_distribution<std::size_t>(0, endpoints.size() - 1)(soc_rng)];
      g.add_edge(make_id("p", p), make_id("p", target), EdgeType::Citation);
      endpoints.push_back(target);
      endpoints.push_back(p);
    }
  }

  // Features: hashed profile text, then role/class offsets.
  std::uint64_t feat_seed = derive_seed(cfg.seed, "features");
  std::mt19937_64 prof_rng(derive_seed(cfg.seed, "profiles"));
  std::map<NodeId, std::string> pub_texts, news_texts, user_texts;
  for (std::size_t i = 0; i < cfg.n_publishers; ++i) {
    pub_texts[make_id("p", i)] = random_profile("publisher", i, prof_rng);
  }
  for (std::size_t i = 0; i < cfg.n_news; ++i) {
    news_texts[make_id("n", i)] = random_profile("news", i, prof_rng);
  }
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    user_texts[make_id("u", i)] = random_profile("user", i, prof_rng);
  }
  FeatureTable pub_table = hash_features(pub_texts, NodeType::Publisher, cfg.publisher_dim, feat_seed);
  FeatureTable news_table = hash_features(news_texts, NodeType::News, cfg.news_dim, feat_seed);
  FeatureTable user_table = hash_features(user_texts, NodeType::User, cfg.user_dim, feat_seed);

  // Instigators carry a distinct profile direction regardless of signal;
  // class-correlated directions are scaled by feature_signal only.
  Tensor dir_inst = unit_direction(cfg.user_dim, derive_seed(cfg.seed, "dir-instigator"));
  for (std::size_t i = 0; i < n_inst; ++i) {
    offset_and_renormalize(user_table.vectors.at(make_id("u", i)), dir_inst, 1.2);
  }
  if (cfg.feature_signal > 0.0) {
    Tensor dir_cls = unit_direction(cfg.news_dim, derive_seed(cfg.seed, "dir-class"));
    for (std::size_t i = 0; i < cfg.n_news; ++i) {
      double s = labels[i] == 1 ? -cfg.feature_signal : cfg.feature_signal;
      offset_and_renormalize(news_table.vectors.at(make_id("n", i)), dir_cls, s);
    }
    Tensor dir_bias = unit_direction(cfg.publisher_dim, derive_seed(cfg.seed, "dir-bias"));
    for (std::size_t i = 0; i < n_biased; ++i) {
      offset_and_renormalize(pub_table.vectors.at(make_id("p", i)), dir_bias, cfg.feature_signal);
    }
  }

  out.tables.push_back(std::move(pub_table));
  out.tables.push_back(std::move(news_table));
  out.tables.push_back(std::move(user_table));
  g.validate();
  return out;
}

SynthSummary describe(const SynthConfig& cfg) {
  cfg.validate();
  SynthSummary s;
  s.regime = to_string(cfg.regime);
  s.n_news = cfg.n_news;
  s.n_fake = static_cast<std::size_t>(std::lround(cfg.fake_frac * static_cast<double>(cfg.n_news)));
  s.n_users = cfg.n_users;
  s.n_instigators = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(cfg.instigator_frac * static_cast<double>(cfg.n_users))));
  s.n_publishers = cfg.n_publishers;
  s.horizon_hours = cfg.horizon_hours;
  s.spike_period_hours = cfg.spike_period_hours;
  s.base_rate = cfg.base_rate;
  s.decay_tau_hours = cfg.decay_tau_hours;
  s.seed = cfg.seed;
  return s;
}

void SynthSummary::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open summary file for writing: " + path);
  os << "regime=" << regime << "\n"
     << "n_news=" << n_news << "\n"
     << "n_fake=" << n_fake << "\n"
     << "n_users=" << n_users << "\n"
     << "n_instigators=" << n_instigators << "\n"
     << "n_publishers=" << n_publishers << "\n"
     << "horizon_hours=" << horizon_hours << "\n"
     << "spike_period_hours=" << spike_period_hours << "\n"
     << "base_rate=" << base_rate << "\n"
     << "decay_tau_hours=" << decay_tau_hours << "\n"
     << "seed=" << seed << "\n";
}

SynthSummary SynthSummary::load(const std::string& path) {
  auto kv = parse_kv(path);
  SynthSummary s;
  for (const auto& [key, value] : kv) {
    if (key == "regime") s.regime = value;
    else if (key == "n_news") s.n_news = std::stoull(value);
    else if (key == "n_fake") s.n_fake = std::stoull(value);
    else if (key == "n_users") s.n_users = std::stoull(value);
    else if (key == "n_instigators") s.n_instigators = std::stoull(value);
    else if (key == "n_publishers") s.n_publishers = std::stoull(value);
    else if (key == "horizon_hours") s.horizon_hours = std::stoull(value);
    else if (key == "spike_period_hours") s.spike_period_hours = std::stoull(value);
    else if (key == "base_rate") s.base_rate = std::stod(value);
    else if (key == "decay_tau_hours") s.decay_tau_hours = std::stod(value);
    else if (key == "seed") s.seed = std::stoull(value);
    else throw ConfigError("unknown summary key: " + key);
  }
  return s;
}

}  // namespace mpfnd
