#pragma once

#include <array>
#include <unordered_map>
#include <utility>

#include "mpfnd/featurize.hpp"
#include "mpfnd/hetgraph.hpp"
#include "mpfnd/metapath.hpp"
#include "mpfnd/numerics.hpp"

namespace mpfnd {

enum class EncoderKind { TransE, RotatE, ConvE };
enum class TemporalMode { Gru, Attention };

EncoderKind encoder_from_string(const std::string& s);
TemporalMode temporal_from_string(const std::string& s);
std::string to_string(EncoderKind k);
std::string to_string(TemporalMode m);

struct ConvEConfig {
  std::size_t kh = 3;
  std::size_t kw = 3;
  std::size_t channels = 8;
  std::size_t reshape_rows = 16;
};

struct ModelConfig {
  std::size_t d_hidden = 512;
  std::size_t heads = 8;
  std::size_t d_semantic = 128;
  EncoderKind encoder = EncoderKind::TransE;
  TemporalMode temporal_mode = TemporalMode::Gru;
  double leaky_slope = 0.01;
  ConvEConfig conve;
  std::size_t ps_samples = 16;
  std::size_t pu_samples = 64;

  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

// ---------------------------------------------------------------------------
// Standalone differentiable pieces (the model wires these together; tests
// exercise them directly)
// ---------------------------------------------------------------------------

// h = W_A·x, no bias, no activation.
Tensor transform_node(const Tensor& x, NodeType type, const ParamStore& params);
std::string transform_param_name(NodeType type);

// (h_u + h_w − r)/2 — the mean of the two relation-shifted hops with the
// inverse relation fixed at −r.
Tensor encode_transe(const Tensor& h_u, const Tensor& h_w, const Tensor& r);
// MEAN[−h_u⊙r⊙r, −h_w⊙r].
Tensor encode_rotate(const Tensor& h_u, const Tensor& h_w, const Tensor& r);

struct ConvECache {
  Tensor stacked;  // 4·rows × cols
  Tensor pre;      // C × H' × W'
  Tensor act;
  Tensor flat;
};
// Reshape h_u, r, h_w, −r to 2-D, stack vertically, convolve, LeakyReLU,
// flatten, project back to d'.
Tensor encode_conve(const Tensor& h_u, const Tensor& h_w, const Tensor& r, const Tensor& kernels,
                    const Tensor& proj, const ModelConfig& cfg, ConvECache* cache = nullptr);
void encode_conve_backward(const ConvECache& c, const Tensor& kernels, const Tensor& proj,
                           const ModelConfig& cfg, const Tensor& g, Tensor& dh_u, Tensor& dh_w,
                           Tensor& dr, Tensor& dkernels, Tensor& dproj);

struct AttnAggCache {
  std::vector<Tensor> inputs;
  std::vector<Tensor> e;      // per head, post-LeakyReLU scores
  std::vector<Tensor> alpha;  // per head, softmax over instances
  std::vector<Tensor> usum;   // per head, pre-tanh weighted sum
  std::vector<Tensor> o;      // per head, tanh(usum)
  Tensor concatv;
  Tensor out;
};
// Multi-head instance attention: per head k, scores LeakyReLU(a_k·h_p),
// softmax over instances, tanh of the weighted sum; heads concatenated and
// projected back to d'.
Tensor attention_aggregate(const std::vector<Tensor>& encoded, const Tensor& attn,
                           const Tensor& proj, double leaky_slope, AttnAggCache* cache = nullptr);
std::vector<Tensor> attention_aggregate_backward(const AttnAggCache& c, const Tensor& attn,
                                                 const Tensor& proj, double leaky_slope,
                                                 const Tensor& g, Tensor& dattn, Tensor& dproj);

struct GruAggCache {
  std::vector<GruCache> steps;
};
// Runs the GRU from h0 = 0 over the chronologically ordered sequence; the
// final hidden state is the path representation.
Tensor gru_aggregate(const std::vector<Tensor>& encoded_sorted, const GruParams& p,
                     GruAggCache* cache = nullptr);
std::vector<Tensor> gru_aggregate_backward(const GruAggCache& c, const GruParams& p,
                                           const Tensor& g, GruGrads& grads);

struct FuseCache {
  std::vector<std::array<Tensor, 2>> h_path;  // per target: [h_S, h_U]
  std::vector<std::array<Tensor, 2>> t_path;  // tanh(M·h + b)
  std::array<Tensor, 2> s;                    // batch means per path
  std::array<double, 2> e{};                  // tanh(q·s)
  Tensor beta;                                // softmax over the two paths
  std::vector<Tensor> out;
};
// Batch-shared path attention: s_P averages tanh(M·h + b) over the batch,
// β = softmax(tanh(q·s_P)), each target fused as β_S·h_S + β_U·h_U.
void semantic_fuse(const std::vector<std::array<Tensor, 2>>& h_path, const Tensor& M,
                   const Tensor& b, const Tensor& q, FuseCache& cache);
// dh_path out parameter mirrors h_path; dM/db/dq accumulated.
void semantic_fuse_backward(const FuseCache& c, const Tensor& M, const Tensor& b, const Tensor& q,
                            const std::vector<Tensor>& dout,
                            std::vector<std::array<Tensor, 2>>& dh_path, Tensor& dM, Tensor& db,
                            Tensor& dq);

// ---------------------------------------------------------------------------
// The full network
// ---------------------------------------------------------------------------

class Model {
 public:
  Model(const HeteroGraph& g, const FeatureBundle& bundle, ModelConfig cfg);

  const ModelConfig& config() const { return cfg_; }
  const HeteroGraph& graph() const { return *g_; }

  // Xavier matrices, zero biases, relation embeddings ~ U(−0.1, 0.1).
  ParamStore init_params(std::uint64_t seed) const;

  struct InstanceCache {
    NodeId u, w;
    NodeType w_type = NodeType::User;
    Tensor hu, hw;
    Tensor enc;
    ConvECache conve;
  };
  struct PathCache {
    bool used_default = false;
    std::vector<InstanceCache> inst;
    AttnAggCache attn;
    GruAggCache gru;
    Tensor h;
  };
  struct TargetCache {
    NodeId target;
    PathCache ps, pu;
  };
  struct BatchCache {
    std::vector<TargetCache> targets;
    FuseCache fuse;
    std::vector<Tensor> logits;
    std::vector<Tensor> probs;  // [P_real, P_fake]
  };

  // Full pipeline over the minibatch; β in the fusion step is shared across
  // the batch, so forward/backward always run batched (size 1 allowed).
  BatchCache forward_batch(const std::vector<NodeId>& targets, const ParamStore& params,
                           std::uint64_t sample_seed) const;
  // dlogits per target (for cross-entropy: probs − onehot, pre-scaled by the
  // caller's batch normalization). Accumulates into params' gradient slots.
  void backward_batch(const BatchCache& cache, const std::vector<Tensor>& dlogits,
                      ParamStore& params) const;

  // Single-target convenience: returns (h_v, probs).
  std::pair<Tensor, Tensor> forward(const NodeId& target, const ParamStore& params,
                                    std::uint64_t sample_seed) const;

  struct Pools {
    std::vector<MetaPathInstance> ps, pu;
  };
  const Pools& pools_for(const NodeId& target) const;

 private:
  Tensor encode_instance(const Tensor& hu, const Tensor& hw, const Tensor& r,
                         const ParamStore& params, ConvECache* cache) const;

  const HeteroGraph* g_;
  const FeatureBundle* bundle_;
  ModelConfig cfg_;
  mutable std::unordered_map<NodeId, Pools> pool_cache_;
};

}  // namespace mpfnd
