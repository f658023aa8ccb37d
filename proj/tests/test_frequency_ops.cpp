#include <doctest.h>

#include <cmath>
#include <complex>

#include "fcvsr/frequency_ops.hpp"
#include "fcvsr/ops.hpp"
#include "helpers.hpp"

using namespace fcvsr;
using testutil::fd_check;
using testutil::max_abs_diff;
using testutil::rand_tensor;

namespace {

// O(n^4) reference DFT with the DC bin moved to (h/2, w/2), evaluated
// independently of the production transform.
FrequencyFeature dft2_reference(const Tensor& x) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  FrequencyFeature f{Tensor({h, w, c}), Tensor({h, w, c})};
  const double tau = 2.0 * std::acos(-1.0);
  for (int ch = 0; ch < c; ++ch)
    for (int u = 0; u < h; ++u)
      for (int v = 0; v < w; ++v) {
        const int ku = ((u - h / 2) % h + h) % h;  // undo the centering
        const int kv = ((v - w / 2) % w + w) % w;
        std::complex<double> acc(0.0, 0.0);
        for (int y = 0; y < h; ++y)
          for (int xw = 0; xw < w; ++xw) {
            const double ang = -tau * (double(ku) * y / h + double(kv) * xw / w);
            acc += x.at(y, xw, ch) * std::complex<double>(std::cos(ang), std::sin(ang));
          }
        f.real.at(u, v, ch) = acc.real();
        f.imag.at(u, v, ch) = acc.imag();
      }
  return f;
}

double gauss_lp_ref(double r2, double d) { return d <= 0.0 ? 0.0 : std::exp(-r2 / (2.0 * d * d)); }

double radius2_ref(int u, int v, int h, int w) {
  const double du = u - h / 2, dv = v - w / 2;
  return du * du + dv * dv;
}

}  // namespace

TEST_SUITE_BEGIN("frequency_ops");

TEST_CASE("spectrum matches a direct DFT") {
  for (auto shape : {std::vector<int>{8, 8, 1}, std::vector<int>{6, 4, 2}}) {
    Tensor x = rand_tensor(shape, 17);
    FrequencyFeature got = fft2_feature(x);
    FrequencyFeature want = dft2_reference(x);
    CHECK(max_abs_diff(got.real, want.real) < 1e-9);
    CHECK(max_abs_diff(got.imag, want.imag) < 1e-9);
  }
}

TEST_CASE("constant image concentrates at the centered DC bin") {
  Tensor x = Tensor::full({8, 6, 1}, 0.25);
  FrequencyFeature f = fft2_feature(x);
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 6; ++v) {
      const double want = (u == 4 && v == 3) ? 0.25 * 8 * 6 : 0.0;
      CHECK(std::abs(f.real.at(u, v, 0) - want) < 1e-10);
      CHECK(std::abs(f.imag.at(u, v, 0)) < 1e-10);
    }
}

TEST_CASE("inverse transform round-trips") {
  Tensor x = rand_tensor({12, 10, 3}, 18);
  CHECK(max_abs_diff(ifft2_feature_real(fft2_feature(x)), x) < 1e-10);
}

TEST_CASE("default band masks telescope to the widest Gaussian low-pass") {
  for (int q : {1, 2, 4, 8}) {
    MaskSet ms = make_mask_set(16, 16, q, MaskVariant::kConsecutiveGaussian);
    REQUIRE(static_cast<int>(ms.masks.size()) == q);
    const double dq = ms.cutoffs.back();
    CHECK(dq == doctest::Approx(std::sqrt(2.0) * 8.0).epsilon(1e-12));
    for (int u = 0; u < 16; ++u)
      for (int v = 0; v < 16; ++v) {
        double sum = 0.0;
        for (const auto& m : ms.masks) sum += m.v[static_cast<size_t>(u) * 16 + v];
        CHECK(sum == doctest::Approx(gauss_lp_ref(radius2_ref(u, v, 16, 16), dq)).epsilon(1e-12));
      }
  }
}

TEST_CASE("cumulative masks subtract every previous low-pass") {
  MaskSet ms = make_mask_set(16, 16, 3, MaskVariant::kCumulativeGaussian);
  // at DC every low-pass is exactly 1, so band 3 is 1 - 1 - 1
  CHECK(ms.masks[2].v[8 * 16 + 8] == -1.0);
  // first band has nothing to subtract and matches the default variant
  MaskSet cons = make_mask_set(16, 16, 3, MaskVariant::kConsecutiveGaussian);
  CHECK(max_abs_diff(ms.masks[0], cons.masks[0]) == 0.0);
}

TEST_CASE("ideal masks form disjoint annuli that cover the disc") {
  const int h = 16, w = 12, q = 4;
  MaskSet ms = make_mask_set(h, w, q, MaskVariant::kIdeal);
  const double dq = ms.cutoffs.back();
  CHECK(ms.masks[0].v[static_cast<size_t>(h / 2) * w + w / 2] == 1.0);  // DC in band 1
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      double sum = 0.0, prod_pairs = 0.0;
      for (int a = 0; a < q; ++a) {
        const double ma = ms.masks[static_cast<size_t>(a)].v[static_cast<size_t>(u) * w + v];
        CHECK((ma == 0.0 || ma == 1.0));
        sum += ma;
        for (int b = a + 1; b < q; ++b)
          prod_pairs += ma * ms.masks[static_cast<size_t>(b)].v[static_cast<size_t>(u) * w + v];
      }
      const double r = std::sqrt(radius2_ref(u, v, h, w));
      CHECK(sum == (r <= dq ? 1.0 : 0.0));
      CHECK(prod_pairs == 0.0);
    }
}

TEST_CASE("butterworth masks telescope to the widest order-2 low-pass") {
  const int h = 16, w = 16, q = 4;
  MaskSet ms = make_mask_set(h, w, q, MaskVariant::kButterworth);
  const double dq = ms.cutoffs.back();
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      double sum = 0.0;
      for (const auto& m : ms.masks) sum += m.v[static_cast<size_t>(u) * w + v];
      const double t = radius2_ref(u, v, h, w) / (dq * dq);
      CHECK(sum == doctest::Approx(1.0 / (1.0 + t * t)).epsilon(1e-12));
    }
}

TEST_CASE("band filtering with an all-ones mask is the identity") {
  Tensor x = rand_tensor({8, 8, 3}, 19);
  CHECK(max_abs_diff(band_filter(x, Tensor::full({8, 8}, 1.0)), x) < 1e-10);
}

TEST_CASE("band filtering masks the spectrum pointwise") {
  // with a hard 0/1 mask the filtered spectrum must vanish off-support and
  // equal the original on-support
  Tensor x = rand_tensor({8, 8, 2}, 20);
  MaskSet ms = make_mask_set(8, 8, 2, MaskVariant::kIdeal);
  const Tensor& m = ms.masks[1];
  FrequencyFeature fx = fft2_feature(x);
  FrequencyFeature fy = fft2_feature(band_filter(x, m));
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v)
      for (int ch = 0; ch < 2; ++ch) {
        const double mv = m.v[static_cast<size_t>(u) * 8 + v];
        CHECK(std::abs(fy.real.at(u, v, ch) - mv * fx.real.at(u, v, ch)) < 1e-9);
        CHECK(std::abs(fy.imag.at(u, v, ch) - mv * fx.imag.at(u, v, ch)) < 1e-9);
      }
}

TEST_CASE("band decomposition commutes with the transform for every band") {
  Tensor x = rand_tensor({8, 8, 2}, 21);
  MaskSet ms = make_mask_set(8, 8, 4, MaskVariant::kConsecutiveGaussian);
  FrequencyFeature fx = fft2_feature(x);
  std::vector<Tensor> bands = decompose(x, ms);
  REQUIRE(bands.size() == 4);
  for (size_t j = 0; j < 4; ++j) {
    FrequencyFeature fb = fft2_feature(bands[j]);
    for (int u = 0; u < 8; ++u)
      for (int v = 0; v < 8; ++v)
        for (int ch = 0; ch < 2; ++ch) {
          const double mv = ms.masks[j].v[static_cast<size_t>(u) * 8 + v];
          CHECK(std::abs(fb.real.at(u, v, ch) - mv * fx.real.at(u, v, ch)) < 1e-8);
          CHECK(std::abs(fb.imag.at(u, v, ch) - mv * fx.imag.at(u, v, ch)) < 1e-8);
        }
  }
}

TEST_CASE("haar analysis of a single 2x2 block by hand") {
  Tensor x({2, 2, 1});
  x.at(0, 0, 0) = 1.0;
  x.at(0, 1, 0) = 2.0;
  x.at(1, 0, 0) = 3.0;
  x.at(1, 1, 0) = 4.0;
  WaveletSubbands sb = dwt2(x);
  CHECK(sb.ll.at(0, 0, 0) == 5.0);
  CHECK(sb.lh.at(0, 0, 0) == -1.0);  // left-minus-right pairs
  CHECK(sb.hl.at(0, 0, 0) == -2.0);  // top-minus-bottom pairs
  CHECK(sb.hh.at(0, 0, 0) == 0.0);
}

TEST_CASE("haar round-trips at even and odd sizes") {
  for (auto shape : {std::vector<int>{8, 6, 2}, std::vector<int>{7, 5, 3}, std::vector<int>{1, 1, 1}}) {
    Tensor x = rand_tensor(shape, 23);
    WaveletSubbands sb = dwt2(x);
    CHECK(sb.ll.dim(0) == (shape[0] + 1) / 2);
    CHECK(sb.ll.dim(1) == (shape[1] + 1) / 2);
    CHECK(max_abs_diff(idwt2(sb), x) < 1e-12);
  }
}

TEST_CASE("haar transform preserves energy") {
  Tensor x = rand_tensor({16, 16, 3}, 24);
  WaveletSubbands sb = dwt2(x);
  double ein = 0.0, eout = 0.0;
  for (double e : x.v) ein += e * e;
  for (const Tensor* t : {&sb.ll, &sb.lh, &sb.hl, &sb.hh})
    for (double e : t->v) eout += e * e;
  CHECK(ein == doctest::Approx(eout).epsilon(1e-10));
}

TEST_CASE("mean filter: corner value under mirrored borders") {
  Tensor x({3, 3, 1});
  for (int i = 0; i < 9; ++i) x.v[static_cast<size_t>(i)] = i + 1;  // 1..9 row-major
  Tensor y = mean_filter(x, 3);
  // window at (0,0) reflects to rows {1,0,1} x cols {1,0,1}:
  // 5 4 5 / 2 1 2 / 5 4 5 -> 33/9
  CHECK(y.at(0, 0, 0) == doctest::Approx(33.0 / 9.0).epsilon(1e-12));
  // interior pixel sees the plain 3x3 average
  CHECK(y.at(1, 1, 0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(max_abs_diff(mean_filter(x, 1), x) == 0.0);
  Tensor c = Tensor::full({5, 4, 2}, 0.3);
  CHECK(max_abs_diff(mean_filter(c, 3), c) < 1e-12);
  CHECK_THROWS(mean_filter(x, 2));
}

TEST_CASE("taped wavelet op stacks the four bands channel-wise") {
  Tape tape;
  Tensor x0 = rand_tensor({6, 6, 2}, 25);
  Var y = ops::dwt2_haar(tape.constant(x0));
  const Tensor& yv = tape.val(y);
  REQUIRE(yv.shape == std::vector<int>{3, 3, 8});
  WaveletSubbands sb = dwt2(x0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int ch = 0; ch < 2; ++ch) {
        CHECK(yv.at(i, j, ch) == sb.ll.at(i, j, ch));
        CHECK(yv.at(i, j, 2 + ch) == sb.lh.at(i, j, ch));
        CHECK(yv.at(i, j, 4 + ch) == sb.hl.at(i, j, ch));
        CHECK(yv.at(i, j, 6 + ch) == sb.hh.at(i, j, ch));
      }
}

TEST_CASE("taped frequency ops agree with finite differences") {
  Tensor x0 = rand_tensor({6, 6, 2}, 26);
  MaskSet ms = make_mask_set(6, 6, 2, MaskVariant::kConsecutiveGaussian);
  CHECK(fd_check(x0, [&](Tape&, Var x) {
          return ops::mean_all(ops::mul(ops::band_filter(x, ms.masks[1]), ops::band_filter(x, ms.masks[1])));
        }) < 1e-4);
  CHECK(fd_check(x0, [](Tape&, Var x) {
          Var w = ops::dwt2_haar(x);
          return ops::mean_all(ops::mul(w, w));
        }) < 1e-4);
  Tensor odd = rand_tensor({5, 5, 2}, 27);
  CHECK(fd_check(odd, [](Tape&, Var x) {
          Var w = ops::dwt2_haar(x);
          return ops::mean_all(ops::mul(w, w));
        }) < 1e-4);
  CHECK(fd_check(x0, [](Tape&, Var x) {
          return ops::mean_all(ops::mul(ops::mean_filter(x, 3), ops::mean_filter(x, 3)));
        }) < 1e-4);
}

TEST_CASE("mask variant names round-trip and reject junk") {
  for (auto v : {MaskVariant::kConsecutiveGaussian, MaskVariant::kCumulativeGaussian,
                 MaskVariant::kIdeal, MaskVariant::kButterworth})
    CHECK(mask_variant_from_string(mask_variant_to_string(v)) == v);
  CHECK(mask_variant_from_string("gaussian") == MaskVariant::kConsecutiveGaussian);
  CHECK_THROWS(mask_variant_from_string("cosine"));
}

TEST_SUITE_END();
