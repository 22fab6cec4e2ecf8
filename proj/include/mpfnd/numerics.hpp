#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mpfnd/tensor.hpp"

namespace mpfnd {

// ---------------------------------------------------------------------------
// Parameter storage
// ---------------------------------------------------------------------------

struct GradPair {
  Tensor value;
  Tensor grad;  // same shape as value, zeroed at the start of each step
};

// Named collection of learnable tensors with matching gradient slots.
// Iteration order is the lexicographic name order (std::map), which fixes
// the optimizer update order and the checkpoint layout.
class ParamStore {
 public:
  void add(const std::string& name, Tensor init);
  bool has(const std::string& name) const { return items_.count(name) > 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  void zero_grads();
  std::size_t size() const { return items_.size(); }

  std::map<std::string, GradPair>& items() { return items_; }
  const std::map<std::string, GradPair>& items() const { return items_; }

  // Binary checkpoint with a versioned header; round-trips bit-exactly.
  // `meta` is an arbitrary UTF-8 string stored alongside the tensors
  // (the model serializes its config there).
  void save(const std::string& path, const std::string& meta = "") const;
  static ParamStore load(const std::string& path, std::string* meta = nullptr);

 private:
  std::map<std::string, GradPair> items_;
};

// ---------------------------------------------------------------------------
// Seeding and initialization
// ---------------------------------------------------------------------------

// FNV-1a over a string, mixed with a root seed. All randomness in the
// artifact flows from a root seed split by component name so that adding a
// stream does not perturb the others.
std::uint64_t derive_seed(std::uint64_t root, const std::string& stream);

Tensor xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);
Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Differentiable primitives (hand-derived backward passes, no tape)
// ---------------------------------------------------------------------------

// y = W·x (+ b). W is m×n, x is length n.
Tensor affine(const Tensor& W, const Tensor& x, const Tensor* b = nullptr);
// Given upstream g (length m): dW += g·xᵀ, db += g, returns dx = Wᵀ·g.
Tensor affine_backward(const Tensor& W, const Tensor& x, const Tensor& g, Tensor& dW,
                       Tensor* db = nullptr);

// Numerically stable softmax over a 1-D tensor.
Tensor softmax(const Tensor& v);
// dv from the softmax output y and upstream g.
Tensor softmax_backward(const Tensor& y, const Tensor& g);

enum class Activation { LeakyRelu, Tanh, Sigmoid };
Activation activation_from_string(const std::string& s);

Tensor activation(Activation kind, const Tensor& x, double leaky_slope = 0.01);
// dx from the input x, the output y and upstream g.
Tensor activation_backward(Activation kind, const Tensor& x, const Tensor& y, const Tensor& g,
                           double leaky_slope = 0.01);

// GRU cell parameters; all matrices are hidden×input (square here since the
// model keeps input and hidden dimensions equal, but the cell itself allows
// input dim != hidden dim).
struct GruParams {
  Tensor Wz, Uz, bz;  // update gate
  Tensor Wr, Ur, br;  // reset gate
  Tensor Wh, Uh, bh;  // candidate
};

struct GruGrads {
  Tensor dWz, dUz, dbz, dWr, dUr, dbr, dWh, dUh, dbh;
  explicit GruGrads(const GruParams& p);
  void accumulate_into(Tensor& dWz_, Tensor& dUz_, Tensor& dbz_, Tensor& dWr_, Tensor& dUr_,
                       Tensor& dbr_, Tensor& dWh_, Tensor& dUh_, Tensor& dbh_) const;
};

struct GruCache {
  Tensor x, h_prev;
  Tensor z, r, hcand;   // gate activations
  Tensor rh;            // r ⊙ h_prev
  Tensor h;             // output
};

// z = σ(Wz·x + Uz·h + bz), r = σ(Wr·x + Ur·h + br),
// h̃ = tanh(Wh·x + Uh·(r⊙h) + bh), h' = (1−z)⊙h + z⊙h̃.
Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p,
                GruCache* cache = nullptr);
// Returns dx; dh_prev accumulated into dh_prev_out.
Tensor gru_cell_backward(const GruCache& c, const GruParams& p, const Tensor& dh, GruGrads& g,
                         Tensor& dh_prev_out);

// Valid cross-correlation of an H×W input with C kernels of kh×kw.
Tensor conv2d(const Tensor& input, const Tensor& kernels);
void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& g, Tensor& dinput,
                     Tensor& dkernels);

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

// Central-difference check of the gradients already stored in `params`
// against the scalar function f (which must read params.value(...) and be
// deterministic). Coordinates may be subsampled per tensor; 0 means all.
// Returns the max over checked coordinates of |analytic−numeric|/max(1,|numeric|).
double grad_check(const std::function<double()>& f, ParamStore& params, double eps,
                  std::size_t coords_per_tensor = 0, std::uint64_t seed = 0);

}  // namespace mpfnd
