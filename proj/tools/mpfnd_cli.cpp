// mpfnd: meta-path based fake news detection over typed news/social graphs.
//
// Subcommands: synth, train, eval, ablate-temporal, ablate-encoder,
// sweep-ratio, export-emb. Every run writes its outputs plus a manifest.json
// into --out; all randomness flows from --seed (default 42), never from the
// clock, so identical invocations produce identical metric files.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "mpfnd/eval.hpp"
#include "mpfnd/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mpfnd;

namespace {

constexpr const char* kVersion = "mpfnd 1.0.0";

std::string iso_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IngestError("cannot open input file: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (is.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Manifest {
  std::string command;
  json config;
  json seeds;
  json input_digests = json::object();
  json outputs = json::array();
  std::string started, finished;

  void write(const fs::path& out_dir) const {
    json m{{"command", command},
           {"tool_version", kVersion},
           {"config", config},
           {"config_hash", std::hash<std::string>{}(config.dump())},
           {"seeds", seeds},
           {"input_digests", input_digests},
           {"outputs", outputs},
           {"started", started},
           {"finished", finished}};
    std::ofstream os(out_dir / "manifest.json");
    if (!os) throw IoError("cannot write manifest in " + out_dir.string());
    os << m.dump(2) << "\n";
  }
};

struct DataArgs {
  std::string graph_path;
  std::string features_dir;

  void attach(CLI::App* cmd) {
    cmd->add_option("--graph", graph_path, "graph JSONL file")->required();
    cmd->add_option("--features-dir", features_dir,
                    "directory with publisher.csv/news.csv/user.csv")
        ->required();
  }

  std::pair<HeteroGraph, FeatureBundle> load(Manifest& man) const {
    HeteroGraph g = HeteroGraph::load(graph_path);
    std::vector<FeatureTable> tables;
    struct Entry {
      const char* file;
      NodeType type;
    };
    for (const Entry& e : {Entry{"publisher.csv", NodeType::Publisher},
                           Entry{"news.csv", NodeType::News}, Entry{"user.csv", NodeType::User}}) {
      std::string path = (fs::path(features_dir) / e.file).string();
      man.input_digests[path] = file_digest(path);
      tables.push_back(load_features(path, e.type));
    }
    man.input_digests[graph_path] = file_digest(graph_path);
    FeatureBundle bundle = FeatureBundle::bind(g, std::move(tables));
    return {std::move(g), std::move(bundle)};
  }
};

struct ModelArgs {
  std::size_t d_hidden = 64;
  std::size_t heads = 4;
  std::size_t d_semantic = 32;
  std::size_t ps_samples = 16;
  std::size_t pu_samples = 64;
  std::string encoder = "transe";
  std::string temporal = "gru";

  void attach(CLI::App* cmd) {
    cmd->add_option("--d-hidden", d_hidden, "hidden dimension d'");
    cmd->add_option("--heads", heads, "attention heads");
    cmd->add_option("--d-semantic", d_semantic, "semantic attention dimension");
    cmd->add_option("--ps-samples", ps_samples, "publisher-path instances sampled per news");
    cmd->add_option("--pu-samples", pu_samples, "user-path instances sampled per news");
    cmd->add_option("--encoder", encoder, "triple encoder")
        ->check(CLI::IsMember({"transe", "rotate", "conve"}));
    cmd->add_option("--temporal", temporal, "user-path aggregation")
        ->check(CLI::IsMember({"gru", "attention"}));
  }

  ModelConfig build() const {
    ModelConfig cfg;
    cfg.d_hidden = d_hidden;
    cfg.heads = heads;
    cfg.d_semantic = d_semantic;
    cfg.ps_samples = ps_samples;
    cfg.pu_samples = pu_samples;
    cfg.encoder = encoder_from_string(encoder);
    cfg.temporal_mode = temporal_from_string(temporal);
    if (cfg.encoder == EncoderKind::ConvE) {
      // Reshape d' to the widest 2-D block that still fits the 3x3 kernels.
      cfg.conve.reshape_rows = d_hidden >= 16 && d_hidden % 4 == 0 ? d_hidden / 4 : d_hidden;
    }
    cfg.validate();
    return cfg;
  }
};

struct TrainArgs {
  double lr = 1e-3;
  double train_frac = 0.70;
  std::size_t patience = 20;
  std::size_t max_epochs = 300;
  std::size_t batch_size = 32;
  std::string optimizer = "adam";

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", lr, "learning rate");
    cmd->add_option("--train-frac", train_frac, "training fraction of labeled news");
    cmd->add_option("--patience", patience, "early-stopping patience (epochs)");
    cmd->add_option("--max-epochs", max_epochs, "epoch cap");
    cmd->add_option("--batch-size", batch_size, "minibatch size (0 = full batch)");
    cmd->add_option("--optimizer", optimizer, "optimizer")
        ->check(CLI::IsMember({"adam", "sgd"}));
  }

  TrainConfig build(std::uint64_t seed) const {
    TrainConfig cfg;
    cfg.lr = lr;
    cfg.train_frac = train_frac;
    cfg.patience = patience;
    cfg.max_epochs = max_epochs;
    cfg.batch_size = batch_size;
    cfg.seed = seed;
    cfg.optimizer = optimizer_from_string(optimizer);
    cfg.validate();
    return cfg;
  }
};

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

json model_config_json(const ModelConfig& cfg) { return json::parse(cfg.to_json()); }

void write_metrics(const fs::path& dir, Manifest& man,
                   const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  std::string path = (dir / "metrics.csv").string();
  save_metrics_csv(rows, path);
  man.outputs.push_back(path);
}

ParamStore load_checkpoint(const std::string& path, ModelConfig& cfg, Manifest& man) {
  man.input_digests[path] = file_digest(path);
  std::string meta;
  ParamStore params = ParamStore::load(path, &meta);
  cfg = ModelConfig::from_json(meta);
  return params;
}

int run_synth(const std::string& config_path, const std::string& out, std::uint64_t seed,
              bool seed_given) {
  Manifest man;
  man.command = "synth";
  man.started = iso_now();
  SynthConfig cfg;
  if (!config_path.empty()) {
    man.input_digests[config_path] = file_digest(config_path);
    cfg = SynthConfig::load(config_path);
  }
  if (seed_given || config_path.empty()) cfg.seed = seed;
  fs::path dir = prepare_out(out);
  SynthData data = generate(cfg);

  std::string graph_path = (dir / "graph.jsonl").string();
  data.graph.save(graph_path);
  man.outputs.push_back(graph_path);
  for (const FeatureTable& t : data.tables) {
    std::string path = (dir / (to_string(t.node_type) + ".csv")).string();
    save_features(t, path);
    man.outputs.push_back(path);
  }
  std::string sum_path = (dir / "summary.txt").string();
  describe(cfg).save(sum_path);
  man.outputs.push_back(sum_path);
  std::string cfg_path = (dir / "synth.cfg").string();
  cfg.save(cfg_path);
  man.outputs.push_back(cfg_path);

  man.config = json{{"regime", to_string(cfg.regime)}, {"n_news", cfg.n_news},
                    {"n_users", cfg.n_users}, {"n_publishers", cfg.n_publishers},
                    {"feature_signal", cfg.feature_signal}};
  man.seeds = json{{"root", cfg.seed}};
  man.finished = iso_now();
  man.write(dir);
  return 0;
}

int run_train(const DataArgs& data, const ModelArgs& margs, const TrainArgs& targs,
              const std::string& out, std::uint64_t seed) {
  Manifest man;
  man.command = "train";
  man.started = iso_now();
  auto [g, bundle] = data.load(man);
  ModelConfig mcfg = margs.build();
  TrainConfig tcfg = targs.build(seed);
  Model model(g, bundle, mcfg);
  Split split = split_dataset(g, g.labeled_news(), tcfg.train_frac, tcfg.seed);
  TrainResult result = train_model(model, split, tcfg);

  fs::path dir = prepare_out(out);
  std::string ckpt = (dir / "checkpoint.bin").string();
  result.params.save(ckpt, mcfg.to_json());
  man.outputs.push_back(ckpt);
  std::string hist = (dir / "history.csv").string();
  save_history_csv(result.history, hist);
  man.outputs.push_back(hist);

  MetricsReport val = evaluate_model(model, result.params, split.val,
                                     derive_seed(tcfg.seed, "eval-sampling"), tcfg.batch_size);
  write_metrics(dir, man, {{"val", val}});

  man.config = json{{"model", model_config_json(mcfg)},
                    {"train_frac", tcfg.train_frac},
                    {"lr", tcfg.lr},
                    {"max_epochs", tcfg.max_epochs},
                    {"patience", tcfg.patience},
                    {"batch_size", tcfg.batch_size}};
  man.seeds = json{{"root", tcfg.seed}, {"eval", derive_seed(tcfg.seed, "eval-sampling")}};
  man.finished = iso_now();
  man.write(dir);
  std::cout << "best epoch " << result.best_epoch + 1 << ", val AUC "
            << val.auc << "\n";
  return 0;
}

int run_eval(const DataArgs& data, const std::string& checkpoint, double train_frac,
             const std::string& out, std::uint64_t seed) {
  Manifest man;
  man.command = "eval";
  man.started = iso_now();
  auto [g, bundle] = data.load(man);
  ModelConfig mcfg;
  ParamStore params = load_checkpoint(checkpoint, mcfg, man);
  Model model(g, bundle, mcfg);
  Split split = split_dataset(g, g.labeled_news(), train_frac, seed);
  MetricsReport test = evaluate_model(model, params, split.test,
                                      derive_seed(seed, "eval-sampling"), 32);
  fs::path dir = prepare_out(out);
  write_metrics(dir, man, {{"test", test}});
  man.config = json{{"model", model_config_json(mcfg)}, {"train_frac", train_frac}};
  man.seeds = json{{"root", seed}, {"eval", derive_seed(seed, "eval-sampling")}};
  man.finished = iso_now();
  man.write(dir);
  std::cout << "test precision " << test.precision << " recall " << test.recall << " f1 "
            << test.f1 << " accuracy " << test.accuracy << " auc " << test.auc << "\n";
  return 0;
}

int run_ablate_temporal(const DataArgs& data, const ModelArgs& margs, const TrainArgs& targs,
                        const std::string& out, std::uint64_t seed) {
  Manifest man;
  man.command = "ablate-temporal";
  man.started = iso_now();
  auto [g, bundle] = data.load(man);
  ModelConfig mcfg = margs.build();
  TrainConfig tcfg = targs.build(seed);
  Split split = split_dataset(g, g.labeled_news(), tcfg.train_frac, tcfg.seed);
  AblationResult res = ablate_temporal(g, bundle, split, mcfg, tcfg);

  fs::path dir = prepare_out(out);
  write_metrics(dir, man, {{"gru", res.with_temporal}, {"attention", res.without_temporal}});
  std::string h1 = (dir / "history_gru.csv").string();
  save_history_csv(res.history_with, h1);
  man.outputs.push_back(h1);
  std::string h2 = (dir / "history_attention.csv").string();
  save_history_csv(res.history_without, h2);
  man.outputs.push_back(h2);

  man.config = json{{"model", model_config_json(mcfg)}, {"train_frac", tcfg.train_frac}};
  man.seeds = json{{"root", seed}};
  man.finished = iso_now();
  man.write(dir);
  std::cout << "gru AUC " << res.with_temporal.auc << ", attention AUC "
            << res.without_temporal.auc << "\n";
  return 0;
}

int run_ablate_encoder(const DataArgs& data, const ModelArgs& margs, const TrainArgs& targs,
                       const std::string& out, std::uint64_t seed) {
  Manifest man;
  man.command = "ablate-encoder";
  man.started = iso_now();
  auto [g, bundle] = data.load(man);
  TrainConfig tcfg = targs.build(seed);
  Split split = split_dataset(g, g.labeled_news(), tcfg.train_frac, tcfg.seed);

  std::vector<std::pair<std::string, MetricsReport>> rows;
  for (const char* name : {"transe", "rotate", "conve"}) {
    ModelArgs enc = margs;
    enc.encoder = name;
    ModelConfig mcfg = enc.build();
    Model model(g, bundle, mcfg);
    TrainResult r = train_model(model, split, tcfg);
    rows.emplace_back(name, evaluate_model(model, r.params, split.test,
                                           derive_seed(tcfg.seed, "eval-sampling"),
                                           tcfg.batch_size));
  }
  fs::path dir = prepare_out(out);
  write_metrics(dir, man, rows);
  man.config = json{{"train_frac", tcfg.train_frac}, {"temporal", margs.temporal}};
  man.seeds = json{{"root", seed}};
  man.finished = iso_now();
  man.write(dir);
  for (const auto& [name, rep] : rows) std::cout << name << " AUC " << rep.auc << "\n";
  return 0;
}

int run_sweep_ratio(const DataArgs& data, const ModelArgs& margs, const TrainArgs& targs,
                    const std::string& ratios_text, const std::string& out, std::uint64_t seed) {
  Manifest man;
  man.command = "sweep-ratio";
  man.started = iso_now();
  std::vector<double> ratios;
  std::stringstream ss(ratios_text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      ratios.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("bad ratio value: " + cell);
    }
  }
  if (ratios.empty()) throw ConfigError("--ratios must list at least one value");

  auto [g, bundle] = data.load(man);
  ModelConfig mcfg = margs.build();
  TrainConfig tcfg = targs.build(seed);
  std::vector<RatioRow> rows = sweep_training_ratio(g, bundle, ratios, mcfg, tcfg);
  fs::path dir = prepare_out(out);
  std::string path = (dir / "ratio.csv").string();
  save_ratio_csv(rows, path);
  man.outputs.push_back(path);
  man.config = json{{"model", model_config_json(mcfg)}, {"ratios", ratios}};
  man.seeds = json{{"root", seed}};
  man.finished = iso_now();
  man.write(dir);
  for (const RatioRow& r : rows) std::cout << r.ratio << " -> AUC " << r.auc << "\n";
  return 0;
}

int run_export_emb(const DataArgs& data, const std::string& checkpoint, const std::string& out,
                   std::uint64_t seed) {
  Manifest man;
  man.command = "export-emb";
  man.started = iso_now();
  auto [g, bundle] = data.load(man);
  ModelConfig mcfg;
  ParamStore params = load_checkpoint(checkpoint, mcfg, man);
  Model model(g, bundle, mcfg);
  std::uint64_t eval_seed = derive_seed(seed, "eval-sampling");
  std::map<NodeId, Tensor> emb;
  for (const NodeId& id : g.node_ids()) {
    if (g.node_type(id) != NodeType::News) continue;
    try {
      emb[id] = model.forward(id, params, eval_seed).first;
    } catch (const IsolationError&) {
      // Isolated news have no meta-path context; skip them.
    }
  }
  fs::path dir = prepare_out(out);
  std::string path = (dir / "embeddings.csv").string();
  export_embeddings(emb, g, path);
  man.outputs.push_back(path);
  man.config = json{{"model", model_config_json(mcfg)}};
  man.seeds = json{{"root", seed}, {"eval", eval_seed}};
  man.finished = iso_now();
  man.write(dir);
  std::cout << "exported " << emb.size() << " embeddings\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-path based fake news detection on heterogeneous news/social graphs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::uint64_t seed = 42;
  app.add_option("--seed", seed, "root seed (default 42; never wall-clock)")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  std::string synth_config, synth_out;
  synth->add_option("--config", synth_config, "flat key=value generator config");
  synth->add_option("--out", synth_out, "output directory")->required();
  auto* synth_seed_opt = synth->add_option("--seed", seed, "root seed override");

  DataArgs train_data, eval_data, abl_t_data, abl_e_data, sweep_data, emb_data;
  ModelArgs train_margs, abl_t_margs, abl_e_margs, sweep_margs;
  TrainArgs train_targs, abl_t_targs, abl_e_targs, sweep_targs;
  std::string train_out, eval_out, abl_t_out, abl_e_out, sweep_out, emb_out;
  std::string eval_ckpt, emb_ckpt, sweep_ratios = "0.1,0.3,0.5,0.7,0.9";
  double eval_train_frac = 0.70;

  auto* train = app.add_subcommand("train", "train a model and checkpoint the best epoch");
  train_data.attach(train);
  train_margs.attach(train);
  train_targs.attach(train);
  train->add_option("--out", train_out, "output directory")->required();
  train->add_option("--seed", seed, "root seed override");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the held-out test part");
  eval_data.attach(eval);
  eval->add_option("--checkpoint", eval_ckpt, "trained checkpoint")->required();
  eval->add_option("--train-frac", eval_train_frac, "training fraction used for the split");
  eval->add_option("--out", eval_out, "output directory")->required();
  eval->add_option("--seed", seed, "root seed override");

  auto* abl_t = app.add_subcommand("ablate-temporal", "compare GRU vs attention aggregation");
  abl_t_data.attach(abl_t);
  abl_t_margs.attach(abl_t);
  abl_t_targs.attach(abl_t);
  abl_t->add_option("--out", abl_t_out, "output directory")->required();
  abl_t->add_option("--seed", seed, "root seed override");

  auto* abl_e = app.add_subcommand("ablate-encoder", "compare the three triple encoders");
  abl_e_data.attach(abl_e);
  abl_e_margs.attach(abl_e);
  abl_e_targs.attach(abl_e);
  abl_e->add_option("--out", abl_e_out, "output directory")->required();
  abl_e->add_option("--seed", seed, "root seed override");

  auto* sweep = app.add_subcommand("sweep-ratio", "AUC as a function of training fraction");
  sweep_data.attach(sweep);
  sweep_margs.attach(sweep);
  sweep_targs.attach(sweep);
  sweep->add_option("--ratios", sweep_ratios, "comma-separated training fractions")
      ->capture_default_str();
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--seed", seed, "root seed override");

  auto* emb = app.add_subcommand("export-emb", "export news embeddings from a checkpoint");
  emb_data.attach(emb);
  emb->add_option("--checkpoint", emb_ckpt, "trained checkpoint")->required();
  emb->add_option("--out", emb_out, "output directory")->required();
  emb->add_option("--seed", seed, "root seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return run_synth(synth_config, synth_out, seed, synth_seed_opt->count() > 0);
    if (train->parsed()) return run_train(train_data, train_margs, train_targs, train_out, seed);
    if (eval->parsed()) return run_eval(eval_data, eval_ckpt, eval_train_frac, eval_out, seed);
    if (abl_t->parsed()) return run_ablate_temporal(abl_t_data, abl_t_margs, abl_t_targs, abl_t_out, seed);
    if (abl_e->parsed()) return run_ablate_encoder(abl_e_data, abl_e_margs, abl_e_targs, abl_e_out, seed);
    if (sweep->parsed()) return run_sweep_ratio(sweep_data, sweep_margs, sweep_targs, sweep_ratios, sweep_out, seed);
    if (emb->parsed()) return run_export_emb(emb_data, emb_ckpt, emb_out, seed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CoverageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConflictError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
