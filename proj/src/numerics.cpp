#include "mpfnd/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mpfnd {

// ---------------------------------------------------------------------------
// ParamStore
// ---------------------------------------------------------------------------

void ParamStore::add(const std::string& name, Tensor init) {
  if (items_.count(name)) throw ConflictError("parameter already registered: " + name);
  Tensor grad(init.shape());
  items_.emplace(name, GradPair{std::move(init), std::move(grad)});
}

Tensor& ParamStore::value(const std::string& name) {
  auto it = items_.find(name);
  if (it == items_.end()) throw NotFoundError("no parameter named " + name);
  return it->second.value;
}

const Tensor& ParamStore::value(const std::string& name) const {
  auto it = items_.find(name);
  if (it == items_.end()) throw NotFoundError("no parameter named " + name);
  return it->second.value;
}

Tensor& ParamStore::grad(const std::string& name) {
  auto it = items_.find(name);
  if (it == items_.end()) throw NotFoundError("no parameter named " + name);
  return it->second.grad;
}

void ParamStore::zero_grads() {
  for (auto& [name, gp] : items_) gp.grad.fill(0.0);
}

namespace {
constexpr char kCkptMagic[] = "MPFND-CKPT-v1\n";

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw IoError("truncated checkpoint");
  return v;
}
void write_str(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string read_str(std::istream& is) {
  std::uint64_t n = read_u64(is);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw IoError("truncated checkpoint");
  return s;
}
}  // namespace

void ParamStore::save(const std::string& path, const std::string& meta) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kCkptMagic, sizeof(kCkptMagic) - 1);
  write_str(os, meta);
  write_u64(os, items_.size());
  for (const auto& [name, gp] : items_) {
    write_str(os, name);
    write_u64(os, gp.value.ndim());
    for (std::size_t d : gp.value.shape()) write_u64(os, d);
    os.write(reinterpret_cast<const char*>(gp.value.data().data()),
             static_cast<std::streamsize>(gp.value.numel() * sizeof(double)));
  }
  if (!os) throw IoError("write failure on checkpoint: " + path);
}

ParamStore ParamStore::load(const std::string& path, std::string* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[sizeof(kCkptMagic)] = {0};
  is.read(magic, sizeof(kCkptMagic) - 1);
  if (!is || std::strncmp(magic, kCkptMagic, sizeof(kCkptMagic) - 1) != 0) {
    throw IoError("bad checkpoint header in " + path);
  }
  std::string m = read_str(is);
  if (meta) *meta = m;
  ParamStore store;
  std::uint64_t count = read_u64(is);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = read_str(is);
    std::uint64_t ndim = read_u64(is);
    std::vector<std::size_t> shape;
    std::size_t numel = 1;
    for (std::uint64_t d = 0; d < ndim; ++d) {
      shape.push_back(read_u64(is));
      numel *= shape.back();
    }
    std::vector<double> data(numel);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(numel * sizeof(double)));
    if (!is) throw IoError("truncated checkpoint tensor: " + name);
    store.add(name, Tensor(std::move(shape), std::move(data)));
  }
  return store;
}

// ---------------------------------------------------------------------------
// Seeds and init
// ---------------------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t root, const std::string& stream) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= root + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

Tensor xavier_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

Tensor uniform_tensor(std::vector<std::size_t> shape, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

Tensor affine(const Tensor& W, const Tensor& x, const Tensor* b) {
  if (W.ndim() != 2 || x.ndim() != 1 || W.dim(1) != x.dim(0)) {
    throw DimensionError("affine shape mismatch W " + W.shape_str() + " x " + x.shape_str());
  }
  std::size_t m = W.dim(0), n = W.dim(1);
  if (b && (b->ndim() != 1 || b->dim(0) != m)) {
    throw DimensionError("affine bias shape mismatch " + b->shape_str());
  }
  Tensor y({m});
  for (std::size_t r = 0; r < m; ++r) {
    double s = b ? (*b)[r] : 0.0;
    const double* wrow = &W.data()[r * n];
    for (std::size_t c = 0; c < n; ++c) s += wrow[c] * x[c];
    y[r] = s;
  }
  return y;
}

Tensor affine_backward(const Tensor& W, const Tensor& x, const Tensor& g, Tensor& dW, Tensor* db) {
  std::size_t m = W.dim(0), n = W.dim(1);
  if (g.ndim() != 1 || g.dim(0) != m) throw DimensionError("affine_backward upstream mismatch");
  if (!dW.same_shape(W)) throw DimensionError("affine_backward dW shape mismatch");
  Tensor dx({n});
  for (std::size_t r = 0; r < m; ++r) {
    double gr = g[r];
    double* dwrow = &dW.data()[r * n];
    const double* wrow = &W.data()[r * n];
    for (std::size_t c = 0; c < n; ++c) {
      dwrow[c] += gr * x[c];
      dx[c] += wrow[c] * gr;
    }
    if (db) (*db)[r] += gr;
  }
  return dx;
}

Tensor softmax(const Tensor& v) {
  if (v.ndim() != 1 || v.numel() == 0) throw DomainError("softmax needs a nonempty vector");
  double mx = v[0];
  for (std::size_t i = 1; i < v.numel(); ++i) mx = std::max(mx, v[i]);
  Tensor y({v.numel()});
  double sum = 0.0;
  for (std::size_t i = 0; i < v.numel(); ++i) {
    y[i] = std::exp(v[i] - mx);
    sum += y[i];
  }
  for (std::size_t i = 0; i < v.numel(); ++i) y[i] /= sum;
  return y;
}

Tensor softmax_backward(const Tensor& y, const Tensor& g) {
  if (!y.same_shape(g)) throw DimensionError("softmax_backward shape mismatch");
  double gy = dot(g, y);
  Tensor dv({y.numel()});
  for (std::size_t i = 0; i < y.numel(); ++i) dv[i] = y[i] * (g[i] - gy);
  return dv;
}

Activation activation_from_string(const std::string& s) {
  if (s == "leaky_relu") return Activation::LeakyRelu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "sigmoid") return Activation::Sigmoid;
  throw ConfigError("unknown activation kind: " + s);
}

Tensor activation(Activation kind, const Tensor& x, double leaky_slope) {
  Tensor y = x;
  switch (kind) {
    case Activation::LeakyRelu:
      for (double& v : y.data()) v = v > 0.0 ? v : leaky_slope * v;
      break;
    case Activation::Tanh:
      for (double& v : y.data()) v = std::tanh(v);
      break;
    case Activation::Sigmoid:
      for (double& v : y.data()) v = 1.0 / (1.0 + std::exp(-v));
      break;
  }
  return y;
}

Tensor activation_backward(Activation kind, const Tensor& x, const Tensor& y, const Tensor& g,
                           double leaky_slope) {
  if (!x.same_shape(g)) throw DimensionError("activation_backward shape mismatch");
  Tensor dx({x.numel()});
  // Preserve the input's shape for multi-dim tensors.
  dx = Tensor(x.shape());
  switch (kind) {
    case Activation::LeakyRelu:
      for (std::size_t i = 0; i < x.numel(); ++i) dx[i] = g[i] * (x[i] > 0.0 ? 1.0 : leaky_slope);
      break;
    case Activation::Tanh:
      for (std::size_t i = 0; i < x.numel(); ++i) dx[i] = g[i] * (1.0 - y[i] * y[i]);
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < x.numel(); ++i) dx[i] = g[i] * y[i] * (1.0 - y[i]);
      break;
  }
  return dx;
}

// ---------------------------------------------------------------------------
// GRU cell
// ---------------------------------------------------------------------------

GruGrads::GruGrads(const GruParams& p)
    : dWz(p.Wz.shape()), dUz(p.Uz.shape()), dbz(p.bz.shape()),
      dWr(p.Wr.shape()), dUr(p.Ur.shape()), dbr(p.br.shape()),
      dWh(p.Wh.shape()), dUh(p.Uh.shape()), dbh(p.bh.shape()) {}

void GruGrads::accumulate_into(Tensor& dWz_, Tensor& dUz_, Tensor& dbz_, Tensor& dWr_, Tensor& dUr_,
                               Tensor& dbr_, Tensor& dWh_, Tensor& dUh_, Tensor& dbh_) const {
  dWz_.add_scaled(dWz, 1.0);
  dUz_.add_scaled(dUz, 1.0);
  dbz_.add_scaled(dbz, 1.0);
  dWr_.add_scaled(dWr, 1.0);
  dUr_.add_scaled(dUr, 1.0);
  dbr_.add_scaled(dbr, 1.0);
  dWh_.add_scaled(dWh, 1.0);
  dUh_.add_scaled(dUh, 1.0);
  dbh_.add_scaled(dbh, 1.0);
}

Tensor gru_cell(const Tensor& x, const Tensor& h_prev, const GruParams& p, GruCache* cache) {
  if (x.ndim() != 1 || h_prev.ndim() != 1) throw DimensionError("gru_cell expects vectors");
  if (p.Wz.dim(1) != x.dim(0) || p.Uz.dim(1) != h_prev.dim(0) || p.Wz.dim(0) != h_prev.dim(0)) {
    throw DimensionError("gru_cell parameter/input dimension mismatch: x " + x.shape_str() +
                         " h " + h_prev.shape_str() + " Wz " + p.Wz.shape_str());
  }
  Tensor z = activation(Activation::Sigmoid, affine(p.Wz, x, &p.bz) + affine(p.Uz, h_prev));
  Tensor r = activation(Activation::Sigmoid, affine(p.Wr, x, &p.br) + affine(p.Ur, h_prev));
  Tensor rh = hadamard(r, h_prev);
  Tensor hcand = activation(Activation::Tanh, affine(p.Wh, x, &p.bh) + affine(p.Uh, rh));
  std::size_t d = h_prev.dim(0);
  Tensor h({d});
  for (std::size_t i = 0; i < d; ++i) h[i] = (1.0 - z[i]) * h_prev[i] + z[i] * hcand[i];
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->z = z;
    cache->r = r;
    cache->rh = rh;
    cache->hcand = hcand;
    cache->h = h;
  }
  return h;
}

Tensor gru_cell_backward(const GruCache& c, const GruParams& p, const Tensor& dh, GruGrads& g,
                         Tensor& dh_prev_out) {
  std::size_t d = c.h.dim(0);
  if (dh.numel() != d) throw DimensionError("gru_cell_backward upstream mismatch");
  Tensor dz({d}), dhcand({d});
  for (std::size_t i = 0; i < d; ++i) {
    dz[i] = dh[i] * (c.hcand[i] - c.h_prev[i]);
    dhcand[i] = dh[i] * c.z[i];
    dh_prev_out[i] += dh[i] * (1.0 - c.z[i]);
  }
  // through tanh candidate
  Tensor dpre_h({d});
  for (std::size_t i = 0; i < d; ++i) dpre_h[i] = dhcand[i] * (1.0 - c.hcand[i] * c.hcand[i]);
  Tensor dx = affine_backward(p.Wh, c.x, dpre_h, g.dWh, &g.dbh);
  Tensor drh = affine_backward(p.Uh, c.rh, dpre_h, g.dUh);
  Tensor dr({d});
  for (std::size_t i = 0; i < d; ++i) {
    dr[i] = drh[i] * c.h_prev[i];
    dh_prev_out[i] += drh[i] * c.r[i];
  }
  // through sigmoid gates
  Tensor dpre_z({d}), dpre_r({d});
  for (std::size_t i = 0; i < d; ++i) {
    dpre_z[i] = dz[i] * c.z[i] * (1.0 - c.z[i]);
    dpre_r[i] = dr[i] * c.r[i] * (1.0 - c.r[i]);
  }
  dx.add_scaled(affine_backward(p.Wz, c.x, dpre_z, g.dWz, &g.dbz), 1.0);
  dh_prev_out.add_scaled(affine_backward(p.Uz, c.h_prev, dpre_z, g.dUz), 1.0);
  dx.add_scaled(affine_backward(p.Wr, c.x, dpre_r, g.dWr, &g.dbr), 1.0);
  dh_prev_out.add_scaled(affine_backward(p.Ur, c.h_prev, dpre_r, g.dUr), 1.0);
  return dx;
}

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& kernels) {
  if (input.ndim() != 2 || kernels.ndim() != 3) {
    throw DimensionError("conv2d expects H×W input and C×kh×kw kernels");
  }
  std::size_t H = input.dim(0), W = input.dim(1);
  std::size_t C = kernels.dim(0), kh = kernels.dim(1), kw = kernels.dim(2);
  if (kh > H || kw > W) {
    throw DimensionError("conv2d kernel " + kernels.shape_str() + " larger than input " +
                         input.shape_str());
  }
  std::size_t Ho = H - kh + 1, Wo = W - kw + 1;
  Tensor out({C, Ho, Wo});
  for (std::size_t ch = 0; ch < C; ++ch) {
    for (std::size_t r = 0; r < Ho; ++r) {
      for (std::size_t cc = 0; cc < Wo; ++cc) {
        double s = 0.0;
        for (std::size_t i = 0; i < kh; ++i) {
          for (std::size_t j = 0; j < kw; ++j) {
            s += input.at(r + i, cc + j) * kernels.at3(ch, i, j);
          }
        }
        out.at3(ch, r, cc) = s;
      }
    }
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& g, Tensor& dinput,
                     Tensor& dkernels) {
  std::size_t H = input.dim(0), W = input.dim(1);
  std::size_t C = kernels.dim(0), kh = kernels.dim(1), kw = kernels.dim(2);
  std::size_t Ho = H - kh + 1, Wo = W - kw + 1;
  if (g.ndim() != 3 || g.dim(0) != C || g.dim(1) != Ho || g.dim(2) != Wo) {
    throw DimensionError("conv2d_backward upstream shape mismatch");
  }
  for (std::size_t ch = 0; ch < C; ++ch) {
    for (std::size_t r = 0; r < Ho; ++r) {
      for (std::size_t cc = 0; cc < Wo; ++cc) {
        double gv = g.at3(ch, r, cc);
        for (std::size_t i = 0; i < kh; ++i) {
          for (std::size_t j = 0; j < kw; ++j) {
            dkernels.at3(ch, i, j) += gv * input.at(r + i, cc + j);
            dinput.at(r + i, cc + j) += gv * kernels.at3(ch, i, j);
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// grad_check
// ---------------------------------------------------------------------------

double grad_check(const std::function<double()>& f, ParamStore& params, double eps,
                  std::size_t coords_per_tensor, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 1e-2)) throw DomainError("grad_check eps must be in (0, 1e-2]");
  double max_rel = 0.0;
  std::mt19937_64 rng(seed);
  for (auto& [name, gp] : params.items()) {
    std::size_t n = gp.value.numel();
    std::vector<std::size_t> coords;
    if (coords_per_tensor == 0 || coords_per_tensor >= n) {
      coords.resize(n);
      for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    } else {
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      for (std::size_t i = 0; i < coords_per_tensor; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(all[i], all[pick(rng)]);
      }
      coords.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(coords_per_tensor));
    }
    for (std::size_t idx : coords) {
      double saved = gp.value[idx];
      gp.value[idx] = saved + eps;
      double fp = f();
      gp.value[idx] = saved - eps;
      double fm = f();
      gp.value[idx] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw EvalError("grad_check: non-finite objective at parameter " + name);
      }
      double numeric = (fp - fm) / (2.0 * eps);
      double analytic = gp.grad[idx];
      double rel = std::fabs(analytic - numeric) / std::max(1.0, std::fabs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace mpfnd
