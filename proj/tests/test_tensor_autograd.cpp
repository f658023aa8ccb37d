#include <doctest.h>

#include <cmath>

#include "fcvsr/nn.hpp"
#include "fcvsr/ops.hpp"
#include "helpers.hpp"

using namespace fcvsr;
using testutil::fd_check;
using testutil::max_abs_diff;
using testutil::rand_tensor;

TEST_SUITE_BEGIN("tensor_autograd");

TEST_CASE("reflect_index mirrors without repeating the edge") {
  // n=5: ..., 2,1,0,1,2,3,4,3,2, ...
  CHECK(reflect_index(0, 5) == 0);
  CHECK(reflect_index(-1, 5) == 1);
  CHECK(reflect_index(-3, 5) == 3);
  CHECK(reflect_index(4, 5) == 4);
  CHECK(reflect_index(5, 5) == 3);
  CHECK(reflect_index(7, 5) == 1);
  CHECK(reflect_index(8, 5) == 0);   // full period
  CHECK(reflect_index(9, 5) == 1);
  CHECK(reflect_index(3, 1) == 0);   // degenerate axis clamps
  CHECK(reflect_index(-2, 1) == 0);
}

TEST_CASE("backward accumulates through a shared leaf") {
  // y = mean(x*x + x): dy/dx = (2x + 1)/n
  Tape tape;
  Tensor x0 = rand_tensor({2, 3, 2}, 7);
  Var x = tape.leaf(x0, true);
  Var y = ops::mean_all(ops::add(ops::mul(x, x), x));
  tape.backward(y);
  const Tensor& g = tape.grad(x);
  for (int64_t i = 0; i < x0.numel(); ++i)
    CHECK(g.v[i] == doctest::Approx((2.0 * x0.v[i] + 1.0) / x0.numel()).epsilon(1e-12));
}

TEST_CASE("grads stop at constants and under NoGrad") {
  Tape tape;
  Var c = tape.constant(rand_tensor({2, 2, 1}, 1));
  Var x = tape.leaf(rand_tensor({2, 2, 1}, 2), true);
  Var y = ops::mean_all(ops::mul(x, c));
  tape.backward(y);
  CHECK(tape.has_grad(x.id));
  CHECK_FALSE(tape.has_grad(c.id));

  const size_t before = tape.num_nodes();
  {
    NoGrad ng(tape);
    Var z = ops::mul(x, x);
    CHECK_FALSE(tape.requires_grad(z));
  }
  CHECK(tape.num_nodes() == before + 1);  // value node, no graph beyond it
}

TEST_CASE("elementwise op gradients match finite differences") {
  Tensor x0 = rand_tensor({3, 4, 2}, 11, 0.2, 1.5);  // positive, away from kinks
  auto check = [&](const std::function<Var(Tape&, Var)>& f) { CHECK(fd_check(x0, f) < 1e-4); };
  check([](Tape&, Var x) { return ops::mean_all(ops::relu(x)); });
  check([](Tape&, Var x) { return ops::mean_all(ops::sigmoid(x)); });
  check([](Tape&, Var x) { return ops::mean_all(ops::abs_v(x)); });
  check([](Tape&, Var x) { return ops::mean_all(ops::sqrt_v(x)); });
  check([](Tape&, Var x) { return ops::sum_all(ops::mul(x, x)); });
  check([](Tape&, Var x) { return ops::mean_all(ops::scale(ops::add_scalar(x, 0.3), -1.7)); });
}

TEST_CASE("concat/slice/reshape round trip and route gradients") {
  Tape tape;
  Tensor a0 = rand_tensor({2, 2, 2}, 3), b0 = rand_tensor({2, 2, 3}, 4);
  Var a = tape.leaf(a0, true);
  Var b = tape.leaf(b0, true);
  Var cat = ops::concat_channels({a, b});
  CHECK(tape.val(cat).dim(2) == 5);
  Var back = ops::slice_channels(cat, 2, 3);
  CHECK(max_abs_diff(tape.val(back), b0) == 0.0);

  // loss touches only the b-slice; a's gradient must be exactly zero
  tape.backward(ops::mean_all(ops::mul(back, back)));
  const Tensor& ga = tape.grad(a);
  for (double g : ga.v) CHECK(g == 0.0);
  const Tensor& gb = tape.grad(b);
  for (int64_t i = 0; i < b0.numel(); ++i)
    CHECK(gb.v[i] == doctest::Approx(2.0 * b0.v[i] / b0.numel()).epsilon(1e-12));
}

TEST_CASE("logsumexp matches a direct computation and its gradient is softmax") {
  Tape tape;
  Tensor x0({4});
  x0.v = {0.3, -1.2, 2.0, 0.0};
  Var x = tape.leaf(x0, true);
  Var y = ops::logsumexp(x);
  double direct = 0.0;
  for (double e : x0.v) direct += std::exp(e);
  CHECK(tape.val(y).v[0] == doctest::Approx(std::log(direct)).epsilon(1e-12));
  tape.backward(y);
  const Tensor& g = tape.grad(x);
  for (size_t i = 0; i < 4; ++i)
    CHECK(g.v[i] == doctest::Approx(std::exp(x0.v[i]) / direct).epsilon(1e-12));
}

TEST_CASE("conv2d matches a direct reflect-padded convolution") {
  Tape tape;
  Tensor x0 = rand_tensor({4, 5, 2}, 21);
  Tensor w0 = rand_tensor({3, 3, 3, 2}, 22);  // {co,k,k,ci}
  Tensor b0 = rand_tensor({3}, 23);
  Var y = nn::conv2d(tape.constant(x0), tape.constant(w0), tape.constant(b0));
  const Tensor& yv = tape.val(y);
  REQUIRE(yv.shape == std::vector<int>{4, 5, 3});
  for (int oy = 0; oy < 4; ++oy)
    for (int ox = 0; ox < 5; ++ox)
      for (int oc = 0; oc < 3; ++oc) {
        double acc = b0.v[static_cast<size_t>(oc)];
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx)
            for (int ic = 0; ic < 2; ++ic)
              acc += w0.v[static_cast<size_t>(((oc * 3 + ky) * 3 + kx) * 2 + ic)] *
                     x0.at(reflect_index(oy + ky - 1, 4), reflect_index(ox + kx - 1, 5), ic);
        CHECK(yv.at(oy, ox, oc) == doctest::Approx(acc).epsilon(1e-12));
      }
}

TEST_CASE("conv2d gradients (x, w, b) match finite differences") {
  Tensor x0 = rand_tensor({3, 4, 2}, 31);
  Tensor w0 = rand_tensor({2, 3, 3, 2}, 32);
  Tensor b0 = rand_tensor({2}, 33);
  CHECK(fd_check(x0, [&](Tape& t, Var x) {
          return ops::mean_all(nn::conv2d(x, t.constant(w0), t.constant(b0)));
        }) < 1e-4);
  CHECK(fd_check(w0, [&](Tape& t, Var w) {
          return ops::mean_all(nn::conv2d(t.constant(x0), w, t.constant(b0)));
        }) < 1e-4);
  CHECK(fd_check(b0, [&](Tape& t, Var b) {
          return ops::mean_all(nn::conv2d(t.constant(x0), t.constant(w0), b));
        }) < 1e-4);
}

TEST_CASE("prelu, pooling and channel gating gradients") {
  Tensor x0 = rand_tensor({3, 3, 4}, 41);
  Tensor a0 = rand_tensor({4}, 42, 0.1, 0.4);
  CHECK(fd_check(x0, [&](Tape& t, Var x) {
          return ops::mean_all(nn::prelu(x, t.constant(a0)));
        }) < 1e-4);
  CHECK(fd_check(a0, [&](Tape& t, Var a) {
          return ops::mean_all(nn::prelu(t.constant(x0), a));
        }) < 1e-4);
  CHECK(fd_check(x0, [](Tape&, Var x) {
          return ops::mean_all(nn::channel_gate(x, nn::global_avg_pool(x)));
        }) < 1e-4);
}

TEST_CASE("bilinear resize keeps constants and its gradient checks out") {
  Tensor c0 = Tensor::full({3, 5, 2}, 0.7);
  Tensor up = nn::bilinear_resize(c0, 9, 10);
  for (double e : up.v) CHECK(e == doctest::Approx(0.7).epsilon(1e-12));

  Tensor x0 = rand_tensor({3, 4, 2}, 51);
  CHECK(fd_check(x0, [](Tape&, Var x) {
          return ops::mean_all(nn::bilinear_resize(x, 7, 9));
        }) < 1e-4);
  CHECK(fd_check(x0, [](Tape&, Var x) {
          return ops::mean_all(nn::bilinear_resize(x, 2, 2));  // downscale path
        }) < 1e-4);
}

TEST_CASE("pixel shuffle rearranges channels into space blocks") {
  Tape tape;
  Tensor x0({1, 1, 8});  // r=2, c=2
  for (int i = 0; i < 8; ++i) x0.v[static_cast<size_t>(i)] = i;
  Var x = tape.leaf(x0, true);
  Var y = nn::pixel_shuffle(x, 2);
  const Tensor& yv = tape.val(y);
  REQUIRE(yv.shape == std::vector<int>{2, 2, 2});
  // channel ch*4 + dy*2 + dx lands at (dy, dx, ch)
  CHECK(yv.at(0, 0, 0) == 0.0);
  CHECK(yv.at(0, 1, 0) == 1.0);
  CHECK(yv.at(1, 0, 0) == 2.0);
  CHECK(yv.at(1, 1, 0) == 3.0);
  CHECK(yv.at(0, 0, 1) == 4.0);
  CHECK(yv.at(1, 1, 1) == 7.0);
  tape.backward(ops::sum_all(y));
  for (double g : tape.grad(x).v) CHECK(g == 1.0);
}

TEST_CASE("warp with zero offset is the identity; integer offsets shift") {
  Tape tape;
  Tensor x0 = rand_tensor({5, 6, 2}, 61);
  Var x = tape.constant(x0);
  Var warped = nn::warp(x, tape.constant(Tensor({5, 6, 2})));
  CHECK(max_abs_diff(tape.val(warped), x0) < 1e-12);

  // offset (dx=1, dy=0) samples one column to the right
  Tensor off({5, 6, 2});
  for (int y = 0; y < 5; ++y)
    for (int xw = 0; xw < 6; ++xw) off.at(y, xw, 0) = 1.0;
  Var shifted = nn::warp(x, tape.constant(off));
  for (int y = 0; y < 5; ++y)
    for (int xw = 0; xw < 5; ++xw)
      for (int c = 0; c < 2; ++c)
        CHECK(tape.val(shifted).at(y, xw, c) == doctest::Approx(x0.at(y, xw + 1, c)).epsilon(1e-12));
}

TEST_CASE("warp gradients: source everywhere, offsets on the interior") {
  Tensor x0 = rand_tensor({5, 5, 2}, 71);
  Tensor off0 = rand_tensor({5, 5, 2}, 72, -0.4, 0.4);  // small, keeps samples interior-ish
  CHECK(fd_check(x0, [&](Tape& t, Var x) {
          return ops::mean_all(nn::warp(x, t.constant(off0)));
        }) < 1e-4);

  // restrict the offset check to strictly interior output pixels: border pixels
  // sit on the clamp boundary where the analytic derivative is one-sided
  Tensor mask({5, 5, 2});
  for (int y = 1; y < 4; ++y)
    for (int xw = 1; xw < 4; ++xw)
      for (int c = 0; c < 2; ++c) mask.at(y, xw, c) = 1.0;
  CHECK(fd_check(off0, [&](Tape& t, Var o) {
          Var w = nn::warp(t.constant(x0), o);
          return ops::mean_all(ops::mul(w, t.constant(mask)));
        }) < 1e-4);
}

TEST_CASE("separable adaptive conv: delta kernels give identity") {
  Tape tape;
  Tensor x0 = rand_tensor({4, 4, 3}, 81);
  const int k = 5;
  Tensor kd({4, 4, 3, k});
  for (int y = 0; y < 4; ++y)
    for (int xw = 0; xw < 4; ++xw)
      for (int c = 0; c < 3; ++c) kd.v[((static_cast<size_t>(y) * 4 + xw) * 3 + c) * k + k / 2] = 1.0;
  Var out = nn::separable_adaptive_conv(tape.constant(x0), tape.constant(kd), tape.constant(kd));
  CHECK(max_abs_diff(tape.val(out), x0) < 1e-12);
}

TEST_CASE("separable adaptive conv: uniform kernels equal the dense outer product") {
  // spatially uniform 1-d kernels -> classic separable convolution; compare
  // against a dense 2-d convolution with the k x k outer-product kernel
  Tape tape;
  const int h = 8, w = 8, c = 2, k = 3;
  Tensor x0 = rand_tensor({h, w, c}, 91);
  Tensor kv1 = rand_tensor({k}, 92), kh1 = rand_tensor({k}, 93);
  Tensor kv({h, w, c, k}), kh({h, w, c, k});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < k; ++i) {
          kv.v[((static_cast<size_t>(y) * w + xw) * c + ch) * k + i] = kv1.v[static_cast<size_t>(i)];
          kh.v[((static_cast<size_t>(y) * w + xw) * c + ch) * k + i] = kh1.v[static_cast<size_t>(i)];
        }
  Var out = nn::separable_adaptive_conv(tape.constant(x0), tape.constant(kv), tape.constant(kh));

  Tensor dense({h, w, c});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < k; ++i)
            acc += kv1.v[static_cast<size_t>(j)] * kh1.v[static_cast<size_t>(i)] *
                   x0.at(reflect_index(y + j - 1, h), reflect_index(xw + i - 1, w), ch);
        dense.at(y, xw, ch) = acc;
      }
  CHECK(max_abs_diff(tape.val(out), dense) < 1e-10);
}

TEST_CASE("separable adaptive conv gradients for input and both kernel banks") {
  const int h = 4, w = 4, c = 2, k = 3;
  Tensor x0 = rand_tensor({h, w, c}, 95);
  Tensor kv0 = rand_tensor({h, w, c, k}, 96);
  Tensor kh0 = rand_tensor({h, w, c, k}, 97);
  CHECK(fd_check(x0, [&](Tape& t, Var x) {
          return ops::mean_all(nn::separable_adaptive_conv(x, t.constant(kv0), t.constant(kh0)));
        }) < 1e-4);
  CHECK(fd_check(kv0, [&](Tape& t, Var kv) {
          return ops::mean_all(nn::separable_adaptive_conv(t.constant(x0), kv, t.constant(kh0)));
        }) < 1e-4);
  CHECK(fd_check(kh0, [&](Tape& t, Var kh) {
          return ops::mean_all(nn::separable_adaptive_conv(t.constant(x0), t.constant(kv0), kh));
        }) < 1e-4);
}

TEST_CASE("parameter store seeds by name, not creation order") {
  ParamStore s1(123), s2(123);
  auto& a1 = s1.get_or_create("alpha", {8}, init_he_uniform(8));
  auto& b1 = s1.get_or_create("beta", {8}, init_he_uniform(8));
  auto& b2 = s2.get_or_create("beta", {8}, init_he_uniform(8));  // reversed order
  auto& a2 = s2.get_or_create("alpha", {8}, init_he_uniform(8));
  CHECK(max_abs_diff(a1, a2) == 0.0);
  CHECK(max_abs_diff(b1, b2) == 0.0);
  CHECK(max_abs_diff(a1, b1) > 0.0);  // different names differ

  ParamStore s3(124);
  auto& a3 = s3.get_or_create("alpha", {8}, init_he_uniform(8));
  CHECK(max_abs_diff(a1, a3) > 0.0);  // different seeds differ

  // stored values are exactly representable in f32
  for (double e : a1.v) CHECK(static_cast<double>(static_cast<float>(e)) == e);
  CHECK_THROWS(s1.get_or_create("alpha", {9}, init_he_uniform(9)));
}

TEST_CASE("one leaf per parameter name per tape, shared across uses") {
  ParamStore store(5);
  Tape tape;
  ParamContext ctx{tape, store, false};
  Var x = tape.constant(rand_tensor({3, 3, 2}, 6));
  Var y1 = nn::conv_layer(ctx, "shared", x, 3, 2);
  Var y2 = nn::conv_layer(ctx, "shared", y1, 3, 2);  // same weights applied twice
  CHECK(ctx.cache.count("shared.w") == 1);
  tape.backward(ops::mean_all(ops::add(y1, y2)));
  // the single leaf accumulated gradient from both applications
  CHECK(tape.has_grad(ctx.cache.at("shared.w").id));
}

TEST_SUITE_END();
