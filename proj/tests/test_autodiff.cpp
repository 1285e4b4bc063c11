#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "compnerf/core/adam.hpp"
#include "compnerf/core/nn.hpp"
#include "compnerf/core/ops.hpp"
#include "compnerf/core/parallel.hpp"
#include "compnerf/core/rng.hpp"
#include "oracles.hpp"

using namespace compnerf;

namespace {

Tensor randt(Shape shape, Rng& rng, bool rg = false, double scale = 1.0) {
  std::vector<real> v(numel(shape));
  for (auto& x : v) x = real(rng.uniform(-scale, scale));
  return Tensor::from(std::move(shape), std::move(v), rg);
}

}  // namespace

TEST_CASE("tensor invariants") {
  Tensor t = Tensor::zeros({2, 3});
  CHECK(t.size() == 6);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), Error);
  Tensor s = Tensor::scalar(2.5);
  CHECK(s.item() == doctest::Approx(2.5));
}

TEST_CASE("elementwise analytic values") {
  Tensor x = Tensor::from({3}, {real(0), real(-3.2), real(3.2)});
  CHECK(softplus(x).data()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(sigmoid(x).data()[0] == doctest::Approx(0.5));
  Tensor r = relu(x);
  CHECK(r.data()[1] == real(0));
  CHECK(r.data()[2] == doctest::Approx(3.2));
}

TEST_CASE("shape mismatch errors name the op and shapes") {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({3, 3});
  try {
    add(a, b);
    FAIL("expected error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("add") != std::string::npos);
    CHECK(msg.find("[2,3]") != std::string::npos);
    CHECK(msg.find("[3,3]") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, Tensor::zeros({2, 4})), Error);
}

TEST_CASE("backward of x*x") {
  Tensor x = Tensor::from({1}, {real(3)}, true);
  Tape tape;
  {
    TapeScope scope(&tape);
    Tensor y = mul(x, x);
    backward(tape, y);
  }
  CHECK(x.grad()[0] == doctest::Approx(6.0));
}

TEST_CASE("backward rejects non-scalar roots and accumulates over calls") {
  Tensor x = Tensor::from({2}, {real(1), real(2)}, true);
  Tape tape;
  TapeScope scope(&tape);
  Tensor y = mul(x, x);
  CHECK_THROWS_AS(backward(tape, y), Error);
  Tensor s = sum(y);
  backward(tape, s);
  const real g1 = x.grad()[0];
  backward(tape, s);
  CHECK(x.grad()[0] == doctest::Approx(2.0 * double(g1)));
  CHECK(g1 == doctest::Approx(2.0));
}

TEST_CASE("gradients of sum(sigmoid(W v)) match finite differences") {
  Rng rng = Rng::seeded(7);
  Tensor w = randt({4, 3}, rng, true);
  Tensor v = randt({1, 4}, rng, false);

  auto loss = [&]() {
    Tensor y = sum(sigmoid(matmul(v, w)));
    return double(y.item());
  };
  Tape tape;
  {
    TapeScope scope(&tape);
    Tensor y = sum(sigmoid(matmul(v, w)));
    backward(tape, y);
  }
  std::vector<real> analytic(w.grad().begin(), w.grad().end());
  const double worst = oracles::finite_diff_worst_rel(w, loss, analytic);
#ifdef COMPNERF_REAL64
  CHECK(worst < 1e-4);
#else
  CHECK(worst < 5e-2);
#endif
}

TEST_CASE("composite op gradients match finite differences") {
  // One graph exercising matmul, concat, broadcast, slicing, activations,
  // rowwise scale, transpose and reshape together.
  Rng rng = Rng::seeded(11);
  Tensor w1 = randt({5, 4}, rng, true);
  Tensor w2 = randt({6, 2}, rng, true);
  Tensor x = randt({3, 5}, rng, false);
  Tensor z = randt({2}, rng, true);
  auto weights = std::make_shared<const std::vector<real>>(std::vector<real>{
      real(0.5), real(-1.5), real(2.0)});

  auto build = [&]() {
    Tensor h = relu(matmul(x, w1));                       // [3,4]
    Tensor zz = broadcast_row(z, 3);                      // [3,2]
    Tensor cat = concat_cols({h, zz});                    // [3,6]
    Tensor out = softplus(matmul(cat, w2));               // [3,2]
    Tensor sl = slice_rows(out, 1, 3);                    // [2,2]
    Tensor t = transpose2d(sl);                           // [2,2]
    Tensor rs = rowwise_scale(reshape(t, {2, 2}), std::make_shared<const std::vector<real>>(
                                                      std::vector<real>{real(1.2), real(-0.3)}));
    Tensor all = concat_rows({rs, sigmoid(sl)});          // [4,2]
    Tensor sc = rowwise_scale(out, weights);
    return add(mean(all), sum(sc));
  };

  for (Tensor* p : {&w1, &w2, &z}) {
    w1.zero_grad();
    w2.zero_grad();
    z.zero_grad();
    Tape tape;
    {
      TapeScope scope(&tape);
      backward(tape, build());
    }
    std::vector<real> analytic(p->grad().begin(), p->grad().end());
    auto loss = [&]() { return double(build().item()); };
    const double worst = oracles::finite_diff_worst_rel(*p, loss, analytic);
#ifdef COMPNERF_REAL64
    CHECK(worst < 1e-4);
#else
    CHECK(worst < 5e-2);
#endif
  }
}

TEST_CASE("conv3d analytic cases") {
  Tensor ones = Tensor::full({1, 3, 3, 3}, 1);
  Tensor kern = Tensor::full({1, 1, 3, 3, 3}, 1);
  Tensor y = conv3d(ones, kern, Tensor(), 1, 0);
  CHECK(y.shape() == Shape{1, 1, 1, 1});
  CHECK(y.data()[0] == doctest::Approx(27.0));

  // Delta kernel reproduces the input under padding 1.
  Rng rng = Rng::seeded(3);
  Tensor x = randt({2, 3, 4, 5}, rng);
  std::vector<real> kd(2 * 2 * 27, 0);
  kd[0 * 2 * 27 + 0 * 27 + 13] = 1;  // center tap of channel (0,0)
  kd[1 * 2 * 27 + 1 * 27 + 13] = 1;  // center tap of channel (1,1)
  Tensor delta = Tensor::from({2, 2, 3, 3, 3}, kd);
  Tensor id = conv3d(x, delta, Tensor(), 1, 1);
  REQUIRE(id.shape() == x.shape());
  for (int64_t i = 0; i < x.size(); ++i) CHECK(id.data()[i] == doctest::Approx(x.data()[i]));

  CHECK_THROWS_AS(conv3d(Tensor::zeros({1, 1, 1, 1}), kern, Tensor(), 1, 0), Error);
}

TEST_CASE("conv3d matches the naive reference on random instances") {
  Rng rng = Rng::seeded(17);
  for (const int stride : {1, 2}) {
    Tensor x = randt({2, 5, 5, 5}, rng);
    Tensor k = randt({2, 2, 3, 3, 3}, rng);
    Tensor b = randt({2}, rng);
    Tensor y = conv3d(x, k, b, stride, 1);
    std::vector<double> xd(x.data().begin(), x.data().end());
    std::vector<double> kd(k.data().begin(), k.data().end());
    std::vector<double> bd(b.data().begin(), b.data().end());
    const auto ref = oracles::conv3d_reference(xd, 2, 5, 5, 5, kd, 2, stride, 1, bd);
    REQUIRE(size_t(y.size()) == ref.size());
    for (size_t i = 0; i < ref.size(); ++i) {
      const double denom = std::max(std::abs(ref[i]), 1e-6);
      CHECK(std::abs(double(y.data()[i]) - ref[i]) / denom < 1e-5);
    }
  }
}

TEST_CASE("conv3d gradients match finite differences") {
  Rng rng = Rng::seeded(23);
  Tensor x = randt({2, 3, 3, 3}, rng, true);
  Tensor k = randt({2, 2, 3, 3, 3}, rng, true);
  Tensor b = randt({2}, rng, true);
  auto build = [&]() { return mean(sigmoid(conv3d(x, k, b, 2, 1))); };
  for (Tensor* p : {&x, &k, &b}) {
    p->zero_grad();
    Tape tape;
    {
      TapeScope scope(&tape);
      backward(tape, build());
    }
    std::vector<real> analytic(p->grad().begin(), p->grad().end());
    auto loss = [&]() { return double(build().item()); };
    const double worst = oracles::finite_diff_worst_rel(*p, loss, analytic);
#ifdef COMPNERF_REAL64
    CHECK(worst < 1e-4);
#else
    CHECK(worst < 5e-2);
#endif
  }
}

TEST_CASE("serial and OpenMP kernels agree bit-exactly") {
  Rng rng = Rng::seeded(5);
  Tensor a = randt({17, 9}, rng);
  Tensor b = randt({9, 13}, rng);
  set_num_threads(1);
  Tensor c1 = matmul(a, b);
  set_num_threads(2);
  Tensor c2 = matmul(a, b);
  set_num_threads(1);
  for (int64_t i = 0; i < c1.size(); ++i) CHECK(c1.data()[i] == c2.data()[i]);
}

TEST_CASE("bilinear sampling conventions") {
  // 1x4x4 image with value = x + 10y at pixel (x,y).
  std::vector<real> img(16);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) img[y * 4 + x] = real(x + 10 * y);
  Tensor image = Tensor::from({1, 4, 4}, img);

  auto sample1 = [&](double u, double v) {
    auto uv = std::make_shared<const std::vector<std::array<double, 2>>>(
        std::vector<std::array<double, 2>>{{u, v}});
    return double(bilinear_sample(image, uv).data()[0]);
  };
  CHECK(sample1(2, 3) == doctest::Approx(32.0));         // lattice point
  CHECK(sample1(1.5, 0) == doctest::Approx(1.5));        // midpoint of 1 and 2
  CHECK(sample1(13.0, 1.0) == doctest::Approx(13.0));    // clamps to border x=3
  CHECK(sample1(-10.0, -10.0) == doctest::Approx(0.0));  // clamps to pixel (0,0)

  // Differentiable w.r.t. image values.
  Tensor img_g = Tensor::from({1, 4, 4}, img, true);
  auto uv = std::make_shared<const std::vector<std::array<double, 2>>>(
      std::vector<std::array<double, 2>>{{0.25, 2.75}, {3.9, 3.9}});
  auto build = [&]() { return sum(sigmoid(bilinear_sample(img_g, uv))); };
  Tape tape;
  {
    TapeScope scope(&tape);
    backward(tape, build());
  }
  std::vector<real> analytic(img_g.grad().begin(), img_g.grad().end());
  auto loss = [&]() { return double(build().item()); };
  const double worst = oracles::finite_diff_worst_rel(img_g, loss, analytic);
#ifdef COMPNERF_REAL64
  CHECK(worst < 1e-4);
#else
  CHECK(worst < 5e-2);
#endif
}

TEST_CASE("adam first step and zero-gradient behavior") {
  Tensor p = Tensor::from({1}, {real(0)}, true);
  std::vector<Tensor> params{p};
  AdamState st;
  st.lr = 0.1;
  p.grad()[0] = 1;
  adam_step(params, st);
  CHECK(p.data()[0] == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(st.step_count == 1);

  Tensor q = Tensor::from({1}, {real(0.5)}, true);
  std::vector<Tensor> params2{q};
  AdamState st2;
  q.grad();  // zero gradient buffer
  adam_step(params2, st2);
  CHECK(q.data()[0] == doctest::Approx(0.5));

  Tensor r = Tensor::from({1}, {real(0.5)}, true);
  std::vector<Tensor> params3{r};
  AdamState st3;
  CHECK_THROWS_AS(adam_step(params3, st3), Error);
}

TEST_CASE("adam matches the reference recurrence minimizing x^2") {
  Tensor x = Tensor::from({1}, {real(1)}, true);
  std::vector<Tensor> params{x};
  AdamState st;
  st.lr = 0.1;
  oracles::ScalarAdamRef ref{st.lr, st.beta1, st.beta2, st.eps};
  double xr = 1.0;
  for (int i = 0; i < 100; ++i) {
    x.zero_grad();
    Tape tape;
    {
      TapeScope scope(&tape);
      Tensor y = mul(x, x);
      backward(tape, y);
    }
    xr = ref.step(xr, 2.0 * xr);
    adam_step(params, st);
    CHECK(double(x.data()[0]) == doctest::Approx(xr).epsilon(1e-5));
  }
  CHECK(std::abs(double(x.data()[0])) < 0.1);
}

TEST_CASE("forward determinism for a fixed seed") {
  auto run = [] {
    Rng rng = Rng::seeded(99);
    MLP net = make_mlp({3, 8, 8, 2}, rng);
    Tensor x = randt({4, 3}, rng);
    return net(x);
  };
  set_num_threads(1);
  Tensor a = run();
  Tensor b = run();
  for (int64_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
}
