#include "mpfnd/model.hpp"

#include <cmath>
#include <json.hpp>

namespace mpfnd {

using nlohmann::json;

EncoderKind encoder_from_string(const std::string& s) {
  if (s == "transe") return EncoderKind::TransE;
  if (s == "rotate") return EncoderKind::RotatE;
  if (s == "conve") return EncoderKind::ConvE;
  throw ConfigError("unknown encoder: " + s);
}

TemporalMode temporal_from_string(const std::string& s) {
  if (s == "gru") return TemporalMode::Gru;
  if (s == "attention") return TemporalMode::Attention;
  throw ConfigError("unknown temporal mode: " + s);
}

std::string to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::TransE: return "transe";
    case EncoderKind::RotatE: return "rotate";
    case EncoderKind::ConvE: return "conve";
  }
  return "?";
}

std::string to_string(TemporalMode m) { return m == TemporalMode::Gru ? "gru" : "attention"; }

void ModelConfig::validate() const {
  if (d_hidden == 0 || heads == 0 || d_semantic == 0 || ps_samples == 0 || pu_samples == 0) {
    throw ConfigError("model dimensions and sample sizes must be positive");
  }
  if (d_hidden % heads != 0) {
    throw ConfigError("d_hidden (" + std::to_string(d_hidden) + ") must be divisible by heads (" +
                      std::to_string(heads) + ")");
  }
  if (encoder == EncoderKind::ConvE) {
    if (conve.reshape_rows == 0 || d_hidden % conve.reshape_rows != 0) {
      throw ConfigError("d_hidden must be divisible by the ConvE reshape row count");
    }
    std::size_t cols = d_hidden / conve.reshape_rows;
    if (cols < conve.kw || 4 * conve.reshape_rows < conve.kh) {
      throw ConfigError("ConvE kernel does not fit the reshaped stack");
    }
  }
}

std::string ModelConfig::to_json() const {
  json j{{"d_hidden", d_hidden},
         {"heads", heads},
         {"d_semantic", d_semantic},
         {"encoder", to_string(encoder)},
         {"temporal_mode", to_string(temporal_mode)},
         {"leaky_slope", leaky_slope},
         {"conve_kh", conve.kh},
         {"conve_kw", conve.kw},
         {"conve_channels", conve.channels},
         {"conve_reshape_rows", conve.reshape_rows},
         {"ps_samples", ps_samples},
         {"pu_samples", pu_samples}};
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  ModelConfig c;
  c.d_hidden = j.at("d_hidden").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.d_semantic = j.at("d_semantic").get<std::size_t>();
  c.encoder = encoder_from_string(j.at("encoder").get<std::string>());
  c.temporal_mode = temporal_from_string(j.at("temporal_mode").get<std::string>());
  c.leaky_slope = j.at("leaky_slope").get<double>();
  c.conve.kh = j.at("conve_kh").get<std::size_t>();
  c.conve.kw = j.at("conve_kw").get<std::size_t>();
  c.conve.channels = j.at("conve_channels").get<std::size_t>();
  c.conve.reshape_rows = j.at("conve_reshape_rows").get<std::size_t>();
  c.ps_samples = j.at("ps_samples").get<std::size_t>();
  c.pu_samples = j.at("pu_samples").get<std::size_t>();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Standalone pieces
// ---------------------------------------------------------------------------

std::string transform_param_name(NodeType type) {
  switch (type) {
    case NodeType::Publisher: return "W_publisher";
    case NodeType::News: return "W_news";
    case NodeType::User: return "W_user";
  }
  return "?";
}

Tensor transform_node(const Tensor& x, NodeType type, const ParamStore& params) {
  return affine(params.value(transform_param_name(type)), x);
}

Tensor encode_transe(const Tensor& h_u, const Tensor& h_w, const Tensor& r) {
  if (!h_u.same_shape(h_w) || !h_u.same_shape(r)) {
    throw DimensionError("encode_transe shape mismatch");
  }
  Tensor out(h_u.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = (h_u[i] + h_w[i] - r[i]) * 0.5;
  return out;
}

Tensor encode_rotate(const Tensor& h_u, const Tensor& h_w, const Tensor& r) {
  if (!h_u.same_shape(h_w) || !h_u.same_shape(r)) {
    throw DimensionError("encode_rotate shape mismatch");
  }
  Tensor out(h_u.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out[i] = (-(h_u[i] * r[i] * r[i]) + -(h_w[i] * r[i])) * 0.5;
  }
  return out;
}

namespace {
// Stacks [h_u; r; h_w; −r], each reshaped to rows × cols.
Tensor conve_stack(const Tensor& h_u, const Tensor& h_w, const Tensor& r, std::size_t rows,
                   std::size_t cols) {
  Tensor stacked({4 * rows, cols});
  std::size_t d = rows * cols;
  for (std::size_t i = 0; i < d; ++i) {
    stacked[i] = h_u[i];
    stacked[d + i] = r[i];
    stacked[2 * d + i] = h_w[i];
    stacked[3 * d + i] = -r[i];
  }
  return stacked;
}
}  // namespace

Tensor encode_conve(const Tensor& h_u, const Tensor& h_w, const Tensor& r, const Tensor& kernels,
                    const Tensor& proj, const ModelConfig& cfg, ConvECache* cache) {
  std::size_t d = cfg.d_hidden;
  if (h_u.numel() != d || h_w.numel() != d || r.numel() != d) {
    throw DimensionError("encode_conve input dimension mismatch");
  }
  if (d % cfg.conve.reshape_rows != 0) {
    throw ConfigError("d_hidden not divisible by ConvE reshape rows");
  }
  std::size_t rows = cfg.conve.reshape_rows, cols = d / rows;
  Tensor stacked = conve_stack(h_u, h_w, r, rows, cols);
  Tensor pre = conv2d(stacked, kernels);
  Tensor act = activation(Activation::LeakyRelu, pre, cfg.leaky_slope);
  Tensor flat(std::vector<std::size_t>{act.numel()}, act.data());
  Tensor out = affine(proj, flat);
  if (cache) {
    cache->stacked = std::move(stacked);
    cache->pre = std::move(pre);
    cache->act = std::move(act);
    cache->flat = std::move(flat);
  }
  return out;
}

void encode_conve_backward(const ConvECache& c, const Tensor& kernels, const Tensor& proj,
                           const ModelConfig& cfg, const Tensor& g, Tensor& dh_u, Tensor& dh_w,
                           Tensor& dr, Tensor& dkernels, Tensor& dproj) {
  Tensor dflat = affine_backward(proj, c.flat, g, dproj);
  Tensor dact(c.act.shape(), dflat.data());
  Tensor dpre = activation_backward(Activation::LeakyRelu, c.pre, c.act, dact, cfg.leaky_slope);
  Tensor dstacked(c.stacked.shape());
  conv2d_backward(c.stacked, kernels, dpre, dstacked, dkernels);
  std::size_t d = cfg.d_hidden;
  for (std::size_t i = 0; i < d; ++i) {
    dh_u[i] += dstacked[i];
    dr[i] += dstacked[d + i];
    dh_w[i] += dstacked[2 * d + i];
    dr[i] -= dstacked[3 * d + i];
  }
}

Tensor attention_aggregate(const std::vector<Tensor>& encoded, const Tensor& attn,
                           const Tensor& proj, double leaky_slope, AttnAggCache* cache) {
  if (encoded.empty()) throw DomainError("attention_aggregate needs at least one instance");
  std::size_t K = attn.dim(0), d = attn.dim(1), n = encoded.size();
  for (const Tensor& h : encoded) {
    if (h.numel() != d) throw DimensionError("attention_aggregate instance dimension mismatch");
  }
  AttnAggCache local;
  AttnAggCache& c = cache ? *cache : local;
  c.inputs = encoded;
  c.e.clear();
  c.alpha.clear();
  c.usum.clear();
  c.o.clear();
  std::vector<Tensor> heads;
  for (std::size_t k = 0; k < K; ++k) {
    Tensor scores({n});
    for (std::size_t p = 0; p < n; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += attn.at(k, i) * encoded[p][i];
      scores[p] = s > 0.0 ? s : leaky_slope * s;
    }
    Tensor alpha = softmax(scores);
    Tensor u({d});
    for (std::size_t p = 0; p < n; ++p) u.add_scaled(encoded[p], alpha[p]);
    Tensor o = activation(Activation::Tanh, u);
    c.e.push_back(std::move(scores));
    c.alpha.push_back(std::move(alpha));
    c.usum.push_back(std::move(u));
    heads.push_back(o);
    c.o.push_back(std::move(o));
  }
  c.concatv = concat(heads);
  c.out = affine(proj, c.concatv);
  return c.out;
}

std::vector<Tensor> attention_aggregate_backward(const AttnAggCache& c, const Tensor& attn,
                                                 const Tensor& proj, double leaky_slope,
                                                 const Tensor& g, Tensor& dattn, Tensor& dproj) {
  std::size_t K = attn.dim(0), d = attn.dim(1), n = c.inputs.size();
  Tensor dconcat = affine_backward(proj, c.concatv, g, dproj);
  std::vector<Tensor> dinputs(n, Tensor({d}));
  for (std::size_t k = 0; k < K; ++k) {
    Tensor do_({d});
    for (std::size_t i = 0; i < d; ++i) do_[i] = dconcat[k * d + i];
    Tensor du = activation_backward(Activation::Tanh, c.usum[k], c.o[k], do_);
    Tensor dalpha({n});
    for (std::size_t p = 0; p < n; ++p) {
      dalpha[p] = dot(du, c.inputs[p]);
      dinputs[p].add_scaled(du, c.alpha[k][p]);
    }
    Tensor dscore = softmax_backward(c.alpha[k], dalpha);
    for (std::size_t p = 0; p < n; ++p) {
      // LeakyReLU preserves sign, so the post-activation score carries the
      // branch choice.
      double dpre = dscore[p] * (c.e[k][p] > 0.0 ? 1.0 : leaky_slope);
      for (std::size_t i = 0; i < d; ++i) {
        dattn.at(k, i) += dpre * c.inputs[p][i];
        dinputs[p][i] += dpre * attn.at(k, i);
      }
    }
  }
  return dinputs;
}

Tensor gru_aggregate(const std::vector<Tensor>& encoded_sorted, const GruParams& p,
                     GruAggCache* cache) {
  if (encoded_sorted.empty()) throw DomainError("gru_aggregate needs at least one instance");
  std::size_t d = p.bz.dim(0);
  Tensor h({d});
  GruAggCache local;
  GruAggCache& c = cache ? *cache : local;
  c.steps.clear();
  c.steps.resize(encoded_sorted.size());
  for (std::size_t t = 0; t < encoded_sorted.size(); ++t) {
    h = gru_cell(encoded_sorted[t], h, p, &c.steps[t]);
  }
  return h;
}

std::vector<Tensor> gru_aggregate_backward(const GruAggCache& c, const GruParams& p,
                                           const Tensor& g, GruGrads& grads) {
  std::size_t T = c.steps.size();
  std::size_t d = g.numel();
  std::vector<Tensor> dx(T);
  Tensor dh = g;
  for (std::size_t t = T; t-- > 0;) {
    Tensor dh_prev({d});
    dx[t] = gru_cell_backward(c.steps[t], p, dh, grads, dh_prev);
    dh = std::move(dh_prev);
  }
  return dx;
}

void semantic_fuse(const std::vector<std::array<Tensor, 2>>& h_path, const Tensor& M,
                   const Tensor& b, const Tensor& q, FuseCache& cache) {
  if (h_path.empty()) throw DomainError("semantic_fuse needs a nonempty batch");
  std::size_t B = h_path.size();
  std::size_t dm = M.dim(0);
  cache.h_path = h_path;
  cache.t_path.assign(B, {Tensor({dm}), Tensor({dm})});
  for (std::size_t path = 0; path < 2; ++path) {
    Tensor s({dm});
    for (std::size_t t = 0; t < B; ++t) {
      Tensor th = activation(Activation::Tanh, affine(M, h_path[t][path], &b));
      s.add_scaled(th, 1.0 / static_cast<double>(B));
      cache.t_path[t][path] = std::move(th);
    }
    cache.e[path] = std::tanh(dot(q, s));
    cache.s[path] = std::move(s);
  }
  cache.beta = softmax(Tensor::vec({cache.e[0], cache.e[1]}));
  cache.out.clear();
  for (std::size_t t = 0; t < B; ++t) {
    Tensor h = h_path[t][0] * cache.beta[0];
    h.add_scaled(h_path[t][1], cache.beta[1]);
    cache.out.push_back(std::move(h));
  }
}

void semantic_fuse_backward(const FuseCache& c, const Tensor& M, const Tensor& /*b*/,
                            const Tensor& q, const std::vector<Tensor>& dout,
                            std::vector<std::array<Tensor, 2>>& dh_path, Tensor& dM, Tensor& db,
                            Tensor& dq) {
  std::size_t B = c.h_path.size();
  std::size_t d = c.h_path[0][0].numel();
  if (dout.size() != B) throw DimensionError("semantic_fuse_backward batch size mismatch");
  dh_path.assign(B, {Tensor({d}), Tensor({d})});
  Tensor dbeta({2});
  for (std::size_t t = 0; t < B; ++t) {
    for (std::size_t path = 0; path < 2; ++path) {
      dh_path[t][path].add_scaled(dout[t], c.beta[path]);
      dbeta[path] += dot(dout[t], c.h_path[t][path]);
    }
  }
  Tensor de = softmax_backward(c.beta, dbeta);
  for (std::size_t path = 0; path < 2; ++path) {
    double dqs = de[path] * (1.0 - c.e[path] * c.e[path]);
    dq.add_scaled(c.s[path], dqs);
    Tensor ds = q * dqs;
    for (std::size_t t = 0; t < B; ++t) {
      const Tensor& th = c.t_path[t][path];
      Tensor darg({th.numel()});
      for (std::size_t i = 0; i < th.numel(); ++i) {
        darg[i] = ds[i] * (1.0 - th[i] * th[i]) / static_cast<double>(B);
      }
      dh_path[t][path].add_scaled(affine_backward(M, c.h_path[t][path], darg, dM, &db), 1.0);
    }
  }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

Model::Model(const HeteroGraph& g, const FeatureBundle& bundle, ModelConfig cfg)
    : g_(&g), bundle_(&bundle), cfg_(std::move(cfg)) {
  cfg_.validate();
}

ParamStore Model::init_params(std::uint64_t seed) const {
  std::mt19937_64 rng(derive_seed(seed, "params"));
  ParamStore p;
  std::size_t d = cfg_.d_hidden;
  for (NodeType t : {NodeType::Publisher, NodeType::News, NodeType::User}) {
    if (bundle_->has_type(t)) {
      p.add(transform_param_name(t), xavier_uniform(d, bundle_->dim_for(t), rng));
    }
  }
  p.add("r_S", uniform_tensor({d}, -0.1, 0.1, rng));
  p.add("r_U", uniform_tensor({d}, -0.1, 0.1, rng));
  p.add("attn_S", xavier_uniform(cfg_.heads, d, rng));
  p.add("proj_S", xavier_uniform(d, cfg_.heads * d, rng));
  if (cfg_.temporal_mode == TemporalMode::Attention) {
    p.add("attn_U", xavier_uniform(cfg_.heads, d, rng));
    p.add("proj_U", xavier_uniform(d, cfg_.heads * d, rng));
  } else {
    p.add("gru_Wz", xavier_uniform(d, d, rng));
    p.add("gru_Uz", xavier_uniform(d, d, rng));
    p.add("gru_bz", Tensor({d}));
    p.add("gru_Wr", xavier_uniform(d, d, rng));
    p.add("gru_Ur", xavier_uniform(d, d, rng));
    p.add("gru_br", Tensor({d}));
    p.add("gru_Wh", xavier_uniform(d, d, rng));
    p.add("gru_Uh", xavier_uniform(d, d, rng));
    p.add("gru_bh", Tensor({d}));
  }
  if (cfg_.encoder == EncoderKind::ConvE) {
    std::size_t rows = cfg_.conve.reshape_rows, cols = d / rows;
    std::size_t flat = cfg_.conve.channels * (4 * rows - cfg_.conve.kh + 1) * (cols - cfg_.conve.kw + 1);
    std::mt19937_64 krng(derive_seed(seed, "conve"));
    Tensor kernels({cfg_.conve.channels, cfg_.conve.kh, cfg_.conve.kw});
    std::uniform_real_distribution<double> kd(-0.3, 0.3);
    for (std::size_t i = 0; i < kernels.numel(); ++i) kernels[i] = kd(krng);
    p.add("conve_kernels", std::move(kernels));
    p.add("conve_proj", xavier_uniform(d, flat, rng));
  }
  p.add("M_sem", xavier_uniform(cfg_.d_semantic, d, rng));
  p.add("b_sem", Tensor({cfg_.d_semantic}));
  p.add("q_sem", uniform_tensor({cfg_.d_semantic}, -0.1, 0.1, rng));
  p.add("W_cls", xavier_uniform(2, d, rng));
  p.add("b_cls", Tensor({2}));
  p.add("default_S", Tensor({d}));
  p.add("default_U", Tensor({d}));
  return p;
}

const Model::Pools& Model::pools_for(const NodeId& target) const {
  auto it = pool_cache_.find(target);
  if (it != pool_cache_.end()) return it->second;
  Pools pools;
  pools.ps = enumerate_instances(*g_, target, MetaPathSchema::PS);
  pools.pu = enumerate_instances(*g_, target, MetaPathSchema::PU);
  return pool_cache_.emplace(target, std::move(pools)).first->second;
}

Tensor Model::encode_instance(const Tensor& hu, const Tensor& hw, const Tensor& r,
                              const ParamStore& params, ConvECache* cache) const {
  switch (cfg_.encoder) {
    case EncoderKind::TransE: return encode_transe(hu, hw, r);
    case EncoderKind::RotatE: return encode_rotate(hu, hw, r);
    case EncoderKind::ConvE:
      return encode_conve(hu, hw, r, params.value("conve_kernels"), params.value("conve_proj"),
                          cfg_, cache);
  }
  throw ConfigError("unreachable encoder kind");
}

Model::BatchCache Model::forward_batch(const std::vector<NodeId>& targets,
                                       const ParamStore& params,
                                       std::uint64_t sample_seed) const {
  if (targets.empty()) throw DomainError("forward_batch needs at least one target");
  BatchCache cache;
  std::vector<std::array<Tensor, 2>> h_path;
  GruParams gru;
  if (cfg_.temporal_mode == TemporalMode::Gru) {
    gru = GruParams{params.value("gru_Wz"), params.value("gru_Uz"), params.value("gru_bz"),
                    params.value("gru_Wr"), params.value("gru_Ur"), params.value("gru_br"),
                    params.value("gru_Wh"), params.value("gru_Uh"), params.value("gru_bh")};
  }
  for (const NodeId& target : targets) {
    const Pools& pools = pools_for(target);
    TargetCache tc;
    tc.target = target;
    auto selected_ps = sample_instances(pools.ps, cfg_.ps_samples,
                                        derive_seed(sample_seed, "ps/" + target));
    auto selected_pu = sort_chronological(sample_instances(
        pools.pu, cfg_.pu_samples, derive_seed(sample_seed, "pu/" + target)));
    if (selected_ps.empty() && selected_pu.empty()) {
      throw IsolationError("news node " + target + " has no meta-path instances on either schema");
    }
    auto encode_path = [&](const std::vector<MetaPathInstance>& sel, MetaPathSchema schema,
                           PathCache& pc) {
      const Tensor& r = params.value(schema == MetaPathSchema::PS ? "r_S" : "r_U");
      std::vector<Tensor> encoded;
      for (const MetaPathInstance& inst : sel) {
        InstanceCache ic;
        ic.u = inst.u;
        ic.w = inst.w;
        ic.w_type = g_->node_type(inst.w);
        ic.hu = transform_node(bundle_->lookup(inst.u), NodeType::News, params);
        ic.hw = transform_node(bundle_->lookup(inst.w), ic.w_type, params);
        ic.enc = encode_instance(ic.hu, ic.hw, r, params,
                                 cfg_.encoder == EncoderKind::ConvE ? &ic.conve : nullptr);
        encoded.push_back(ic.enc);
        pc.inst.push_back(std::move(ic));
      }
      return encoded;
    };
    {
      auto encoded = encode_path(selected_ps, MetaPathSchema::PS, tc.ps);
      if (encoded.empty()) {
        tc.ps.used_default = true;
        tc.ps.h = params.value("default_S");
      } else {
        tc.ps.h = attention_aggregate(encoded, params.value("attn_S"), params.value("proj_S"),
                                      cfg_.leaky_slope, &tc.ps.attn);
      }
    }
    {
      auto encoded = encode_path(selected_pu, MetaPathSchema::PU, tc.pu);
      if (encoded.empty()) {
        tc.pu.used_default = true;
        tc.pu.h = params.value("default_U");
      } else if (cfg_.temporal_mode == TemporalMode::Gru) {
        tc.pu.h = gru_aggregate(encoded, gru, &tc.pu.gru);
      } else {
        tc.pu.h = attention_aggregate(encoded, params.value("attn_U"), params.value("proj_U"),
                                      cfg_.leaky_slope, &tc.pu.attn);
      }
    }
    h_path.push_back({tc.ps.h, tc.pu.h});
    cache.targets.push_back(std::move(tc));
  }
  semantic_fuse(h_path, params.value("M_sem"), params.value("b_sem"), params.value("q_sem"),
                cache.fuse);
  const Tensor& Wc = params.value("W_cls");
  const Tensor& bc = params.value("b_cls");
  for (const Tensor& h : cache.fuse.out) {
    Tensor logits = affine(Wc, h, &bc);
    cache.probs.push_back(softmax(logits));
    cache.logits.push_back(std::move(logits));
  }
  return cache;
}

void Model::backward_batch(const BatchCache& cache, const std::vector<Tensor>& dlogits,
                           ParamStore& params) const {
  std::size_t B = cache.targets.size();
  if (dlogits.size() != B) throw StateError("backward_batch upstream size mismatch");
  const Tensor& Wc = params.value("W_cls");
  Tensor& dWc = params.grad("W_cls");
  Tensor& dbc = params.grad("b_cls");
  std::vector<Tensor> dfused;
  for (std::size_t t = 0; t < B; ++t) {
    dfused.push_back(affine_backward(Wc, cache.fuse.out[t], dlogits[t], dWc, &dbc));
  }
  std::vector<std::array<Tensor, 2>> dh_path;
  semantic_fuse_backward(cache.fuse, params.value("M_sem"), params.value("b_sem"),
                         params.value("q_sem"), dfused, dh_path, params.grad("M_sem"),
                         params.grad("b_sem"), params.grad("q_sem"));

  GruParams gru;
  GruGrads* gru_grads = nullptr;
  GruGrads gg{GruParams{}};
  if (cfg_.temporal_mode == TemporalMode::Gru) {
    gru = GruParams{params.value("gru_Wz"), params.value("gru_Uz"), params.value("gru_bz"),
                    params.value("gru_Wr"), params.value("gru_Ur"), params.value("gru_br"),
                    params.value("gru_Wh"), params.value("gru_Uh"), params.value("gru_bh")};
    gg = GruGrads(gru);
    gru_grads = &gg;
  }

  auto backprop_instances = [&](const PathCache& pc, MetaPathSchema schema,
                                const std::vector<Tensor>& dencoded) {
    const std::string rname = schema == MetaPathSchema::PS ? "r_S" : "r_U";
    const Tensor& r = params.value(rname);
    Tensor& dr = params.grad(rname);
    std::size_t d = cfg_.d_hidden;
    for (std::size_t i = 0; i < pc.inst.size(); ++i) {
      const InstanceCache& ic = pc.inst[i];
      const Tensor& g = dencoded[i];
      Tensor dhu({d}), dhw({d});
      switch (cfg_.encoder) {
        case EncoderKind::TransE:
          for (std::size_t j = 0; j < d; ++j) {
            dhu[j] = 0.5 * g[j];
            dhw[j] = 0.5 * g[j];
            dr[j] += -0.5 * g[j];
          }
          break;
        case EncoderKind::RotatE:
          for (std::size_t j = 0; j < d; ++j) {
            dhu[j] = -0.5 * r[j] * r[j] * g[j];
            dhw[j] = -0.5 * r[j] * g[j];
            dr[j] += -0.5 * (2.0 * ic.hu[j] * r[j] + ic.hw[j]) * g[j];
          }
          break;
        case EncoderKind::ConvE:
          encode_conve_backward(ic.conve, params.value("conve_kernels"),
                                params.value("conve_proj"), cfg_, g, dhu, dhw, dr,
                                params.grad("conve_kernels"), params.grad("conve_proj"));
          break;
      }
      affine_backward(params.value("W_news"), bundle_->lookup(ic.u), dhu,
                      params.grad("W_news"));
      affine_backward(params.value(transform_param_name(ic.w_type)), bundle_->lookup(ic.w), dhw,
                      params.grad(transform_param_name(ic.w_type)));
    }
  };

  for (std::size_t t = 0; t < B; ++t) {
    const TargetCache& tc = cache.targets[t];
    // publisher path
    if (tc.ps.used_default) {
      params.grad("default_S").add_scaled(dh_path[t][0], 1.0);
    } else {
      auto dencoded = attention_aggregate_backward(tc.ps.attn, params.value("attn_S"),
                                                   params.value("proj_S"), cfg_.leaky_slope,
                                                   dh_path[t][0], params.grad("attn_S"),
                                                   params.grad("proj_S"));
      backprop_instances(tc.ps, MetaPathSchema::PS, dencoded);
    }
    // user path
    if (tc.pu.used_default) {
      params.grad("default_U").add_scaled(dh_path[t][1], 1.0);
    } else if (cfg_.temporal_mode == TemporalMode::Gru) {
      auto dencoded = gru_aggregate_backward(tc.pu.gru, gru, dh_path[t][1], *gru_grads);
      backprop_instances(tc.pu, MetaPathSchema::PU, dencoded);
    } else {
      auto dencoded = attention_aggregate_backward(tc.pu.attn, params.value("attn_U"),
                                                   params.value("proj_U"), cfg_.leaky_slope,
                                                   dh_path[t][1], params.grad("attn_U"),
                                                   params.grad("proj_U"));
      backprop_instances(tc.pu, MetaPathSchema::PU, dencoded);
    }
  }
  if (gru_grads) {
    gru_grads->accumulate_into(params.grad("gru_Wz"), params.grad("gru_Uz"), params.grad("gru_bz"),
                               params.grad("gru_Wr"), params.grad("gru_Ur"), params.grad("gru_br"),
                               params.grad("gru_Wh"), params.grad("gru_Uh"), params.grad("gru_bh"));
  }
}

std::pair<Tensor, Tensor> Model::forward(const NodeId& target, const ParamStore& params,
                                         std::uint64_t sample_seed) const {
  BatchCache cache = forward_batch({target}, params, sample_seed);
  return {cache.fuse.out[0], cache.probs[0]};
}

}  // namespace mpfnd
