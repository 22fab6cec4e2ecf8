#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mpfnd/numerics.hpp"

using namespace mpfnd;

namespace {

GruParams random_gru(std::size_t d, std::mt19937_64& rng) {
  GruParams p;
  p.Wz = xavier_uniform(d, d, rng);
  p.Uz = xavier_uniform(d, d, rng);
  p.bz = uniform_tensor({d}, -0.2, 0.2, rng);
  p.Wr = xavier_uniform(d, d, rng);
  p.Ur = xavier_uniform(d, d, rng);
  p.br = uniform_tensor({d}, -0.2, 0.2, rng);
  p.Wh = xavier_uniform(d, d, rng);
  p.Uh = xavier_uniform(d, d, rng);
  p.bh = uniform_tensor({d}, -0.2, 0.2, rng);
  return p;
}

}  // namespace

TEST_CASE("softmax matches hand-computed values") {
  Tensor y = softmax(Tensor::vec({1.0, 2.0, 3.0}));
  CHECK(y[0] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(y[1] == doctest::Approx(0.24472847105479767).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(0.66524095577482207).epsilon(1e-12));

  // Uniform input gives uniform output.
  Tensor u = softmax(Tensor::vec({5.0, 5.0, 5.0, 5.0}));
  for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25).epsilon(1e-15));

  // Large inputs must not overflow thanks to the max shift.
  Tensor big = softmax(Tensor::vec({1000.0, 1001.0}));
  CHECK(big.all_finite());
  CHECK(big[1] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("softmax properties on random inputs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-50.0, 50.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 1 + (rng() % 7);
    std::vector<double> xs(n);
    for (auto& x : xs) x = U(rng);
    Tensor y = softmax(Tensor::vec(xs));
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(y[i] > 0.0);
      sum += y[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // Shift invariance.
    std::vector<double> shifted = xs;
    for (auto& x : shifted) x += 13.5;
    Tensor y2 = softmax(Tensor::vec(shifted));
    CHECK(max_abs_diff(y, y2) < 1e-12);
  }
}

TEST_CASE("affine forward and backward against hand example") {
  Tensor W({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor x = Tensor::vec({1, 0, -1});
  Tensor b = Tensor::vec({0.5, -0.5});
  Tensor y = affine(W, x, &b);
  CHECK(y[0] == doctest::Approx(-1.5).epsilon(1e-15));  // 1-3+0.5
  CHECK(y[1] == doctest::Approx(-2.5).epsilon(1e-15));  // 4-6-0.5

  Tensor g = Tensor::vec({1.0, 2.0});
  Tensor dW = Tensor::zeros({2, 3});
  Tensor db = Tensor::zeros({2});
  Tensor dx = affine_backward(W, x, g, dW, &db);
  // dx = Wᵀg
  CHECK(dx[0] == doctest::Approx(9.0));
  CHECK(dx[1] == doctest::Approx(12.0));
  CHECK(dx[2] == doctest::Approx(15.0));
  // dW = g xᵀ
  CHECK(dW.at(0, 0) == doctest::Approx(1.0));
  CHECK(dW.at(0, 2) == doctest::Approx(-1.0));
  CHECK(dW.at(1, 0) == doctest::Approx(2.0));
  CHECK(db[1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(affine(W, Tensor::vec({1, 2}), nullptr), DimensionError);
}

TEST_CASE("activation forward values and slopes") {
  Tensor x = Tensor::vec({-2.0, 0.0, 3.0});
  Tensor lr = activation(Activation::LeakyRelu, x);
  CHECK(lr[0] == doctest::Approx(-0.02).epsilon(1e-15));
  CHECK(lr[1] == doctest::Approx(0.0));
  CHECK(lr[2] == doctest::Approx(3.0));
  Tensor th = activation(Activation::Tanh, x);
  CHECK(th[2] == doctest::Approx(std::tanh(3.0)).epsilon(1e-15));
  Tensor sg = activation(Activation::Sigmoid, x);
  CHECK(sg[0] == doctest::Approx(1.0 / (1.0 + std::exp(2.0))).epsilon(1e-15));
  CHECK(activation_from_string("tanh") == Activation::Tanh);
  CHECK_THROWS_AS(activation_from_string("relu6"), ConfigError);
}

TEST_CASE("softmax/activation backward agree with central differences") {
  std::mt19937_64 rng(3);
  ParamStore ps;
  ps.add("x", uniform_tensor({6}, -1.5, 1.5, rng));
  Tensor w = uniform_tensor({6}, -1, 1, rng);  // fixed mixing weights

  for (Activation kind : {Activation::LeakyRelu, Activation::Tanh, Activation::Sigmoid}) {
    ps.zero_grads();
    Tensor y = activation(kind, ps.value("x"));
    ps.grad("x").add_scaled(activation_backward(kind, ps.value("x"), y, w), 1.0);
    double err = grad_check([&] { return dot(activation(kind, ps.value("x")), w); }, ps, 1e-5);
    CHECK(err < 1e-6);
  }

  ps.zero_grads();
  Tensor y = softmax(ps.value("x"));
  ps.grad("x").add_scaled(softmax_backward(y, w), 1.0);
  double err = grad_check([&] { return dot(softmax(ps.value("x")), w); }, ps, 1e-5);
  CHECK(err < 1e-6);
}

TEST_CASE("affine backward agrees with central differences") {
  std::mt19937_64 rng(4);
  ParamStore ps;
  ps.add("W", xavier_uniform(3, 5, rng));
  ps.add("x", uniform_tensor({5}, -1, 1, rng));
  ps.add("b", uniform_tensor({3}, -1, 1, rng));
  Tensor w = uniform_tensor({3}, -1, 1, rng);

  auto f = [&] { return dot(affine(ps.value("W"), ps.value("x"), &ps.value("b")), w); };
  ps.zero_grads();
  Tensor dx = affine_backward(ps.value("W"), ps.value("x"), w, ps.grad("W"), &ps.grad("b"));
  ps.grad("x").add_scaled(dx, 1.0);
  CHECK(grad_check(f, ps, 1e-5) < 1e-6);
}

TEST_CASE("GRU cell with zero parameters is an identity on the state") {
  std::size_t d = 4;
  GruParams p;
  p.Wz = Tensor::zeros({d, d});
  p.Uz = Tensor::zeros({d, d});
  p.bz = Tensor::zeros({d});
  p.Wr = p.Wz;
  p.Ur = p.Uz;
  p.br = p.bz;
  p.Wh = p.Wz;
  p.Uh = p.Uz;
  p.bh = p.bz;
  Tensor h = Tensor::vec({0.3, -0.7, 0.1, 0.9});
  Tensor x = Tensor::vec({5.0, -5.0, 0.0, 1.0});
  // z = r = 0.5, h̃ = 0 ⇒ h' = 0.5·h.
  Tensor h2 = gru_cell(x, h, p);
  for (std::size_t i = 0; i < d; ++i) CHECK(h2[i] == doctest::Approx(0.5 * h[i]).epsilon(1e-15));
}

TEST_CASE("GRU state stays bounded when inputs are bounded") {
  std::mt19937_64 rng(11);
  std::size_t d = 6;
  GruParams p = random_gru(d, rng);
  Tensor h = Tensor::zeros({d});
  for (int t = 0; t < 200; ++t) {
    Tensor x = uniform_tensor({d}, -1, 1, rng);
    h = gru_cell(x, h, p);
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(h[i]) <= 1.0);
  }
}

TEST_CASE("GRU backward over a 3-step sequence agrees with central differences") {
  std::mt19937_64 rng(12);
  std::size_t d = 4;
  GruParams gp = random_gru(d, rng);
  ParamStore ps;
  ps.add("Wz", gp.Wz);
  ps.add("Uz", gp.Uz);
  ps.add("bz", gp.bz);
  ps.add("Wr", gp.Wr);
  ps.add("Ur", gp.Ur);
  ps.add("br", gp.br);
  ps.add("Wh", gp.Wh);
  ps.add("Uh", gp.Uh);
  ps.add("bh", gp.bh);
  std::vector<Tensor> xs;
  for (int t = 0; t < 3; ++t) xs.push_back(uniform_tensor({d}, -1, 1, rng));
  Tensor w = uniform_tensor({d}, -1, 1, rng);

  auto current = [&] {
    GruParams p;
    p.Wz = ps.value("Wz");
    p.Uz = ps.value("Uz");
    p.bz = ps.value("bz");
    p.Wr = ps.value("Wr");
    p.Ur = ps.value("Ur");
    p.br = ps.value("br");
    p.Wh = ps.value("Wh");
    p.Uh = ps.value("Uh");
    p.bh = ps.value("bh");
    return p;
  };
  auto f = [&] {
    GruParams p = current();
    Tensor h = Tensor::zeros({d});
    for (const Tensor& x : xs) h = gru_cell(x, h, p);
    return dot(h, w);
  };

  ps.zero_grads();
  GruParams p = current();
  std::vector<GruCache> caches(3);
  Tensor h = Tensor::zeros({d});
  for (int t = 0; t < 3; ++t) h = gru_cell(xs[t], h, p, &caches[t]);
  GruGrads gg(p);
  Tensor dh = w;
  for (int t = 2; t >= 0; --t) {
    Tensor dh_prev = Tensor::zeros({d});
    gru_cell_backward(caches[t], p, dh, gg, dh_prev);
    dh = dh_prev;
  }
  gg.accumulate_into(ps.grad("Wz"), ps.grad("Uz"), ps.grad("bz"), ps.grad("Wr"), ps.grad("Ur"),
                     ps.grad("br"), ps.grad("Wh"), ps.grad("Uh"), ps.grad("bh"));
  CHECK(grad_check(f, ps, 1e-5) < 1e-6);
}

TEST_CASE("conv2d valid cross-correlation hand example") {
  // 3x3 input, single 2x2 kernel.
  Tensor in({3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor k({1, 2, 2}, {1, 0, 0, -1});
  Tensor out = conv2d(in, k);
  REQUIRE(out.shape() == std::vector<std::size_t>({1, 2, 2}));
  CHECK(out.at3(0, 0, 0) == doctest::Approx(-4.0));  // 1-5
  CHECK(out.at3(0, 0, 1) == doctest::Approx(-4.0));
  CHECK(out.at3(0, 1, 0) == doctest::Approx(-4.0));
  CHECK(out.at3(0, 1, 1) == doctest::Approx(-4.0));

  // Identity kernel reproduces the valid region.
  Tensor kid({1, 1, 1}, {1.0});
  Tensor same = conv2d(in, kid);
  CHECK(same.shape() == std::vector<std::size_t>({1, 3, 3}));
  CHECK(max_abs_diff(Tensor({3, 3}, same.data()), in) == 0.0);
}

TEST_CASE("conv2d backward agrees with central differences") {
  std::mt19937_64 rng(21);
  ParamStore ps;
  ps.add("in", uniform_tensor({5, 4}, -1, 1, rng));
  ps.add("k", uniform_tensor({2, 3, 3}, -1, 1, rng));
  Tensor out0 = conv2d(ps.value("in"), ps.value("k"));
  Tensor w = uniform_tensor(out0.shape(), -1, 1, rng);

  auto f = [&] { return dot(conv2d(ps.value("in"), ps.value("k")), w); };
  ps.zero_grads();
  conv2d_backward(ps.value("in"), ps.value("k"), w, ps.grad("in"), ps.grad("k"));
  CHECK(grad_check(f, ps, 1e-5) < 1e-6);
}

TEST_CASE("grad_check flags wrong gradients and rejects bad eps") {
  ParamStore ps;
  ps.add("x", Tensor::vec({1.0, 2.0}));
  auto f = [&] {
    const Tensor& x = ps.value("x");
    return x[0] * x[0] + 3.0 * x[1];
  };
  // Correct gradient of x0²+3x1 at (1,2) is (2,3).
  ps.grad("x")[0] = 2.0;
  ps.grad("x")[1] = 3.0;
  CHECK(grad_check(f, ps, 1e-5) < 1e-8);

  ps.grad("x")[1] = -3.0;  // wrong on purpose
  CHECK(grad_check(f, ps, 1e-5) > 1.0);

  CHECK_THROWS_AS(grad_check(f, ps, 0.0), DomainError);
  CHECK_THROWS_AS(grad_check(f, ps, 0.5), DomainError);
}

TEST_CASE("derive_seed is deterministic and stream-separated") {
  CHECK(derive_seed(42, "a") == derive_seed(42, "a"));
  CHECK(derive_seed(42, "a") != derive_seed(42, "b"));
  CHECK(derive_seed(42, "a") != derive_seed(43, "a"));
}

TEST_CASE("ParamStore checkpoints round-trip bit-exactly") {
  std::mt19937_64 rng(5);
  ParamStore ps;
  ps.add("alpha", uniform_tensor({3, 4}, -2, 2, rng));
  ps.add("beta", uniform_tensor({7}, -2, 2, rng));
  std::string path = "ckpt_test.bin";
  ps.save(path, "{\"k\":1}");
  std::string meta;
  ParamStore back = ParamStore::load(path, &meta);
  CHECK(meta == "{\"k\":1}");
  REQUIRE(back.size() == 2);
  CHECK(max_abs_diff(back.value("alpha"), ps.value("alpha")) == 0.0);
  CHECK(max_abs_diff(back.value("beta"), ps.value("beta")) == 0.0);
  std::remove(path.c_str());
  CHECK_THROWS_AS(ParamStore::load("no_such_file.bin"), IoError);
}
