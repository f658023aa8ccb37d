#include "fcvsr/frequency_ops.hpp"

#include <cmath>

#include "fcvsr/fft.hpp"

namespace fcvsr {

using fft::cd;

MaskVariant mask_variant_from_string(const std::string& s) {
  if (s == "consecutive-difference" || s == "gaussian") return MaskVariant::kConsecutiveGaussian;
  if (s == "cumulative") return MaskVariant::kCumulativeGaussian;
  if (s == "ideal") return MaskVariant::kIdeal;
  if (s == "butterworth") return MaskVariant::kButterworth;
  fail("unknown mask variant: " + s +
       " (expected consecutive-difference, cumulative, ideal, or butterworth)");
}

std::string mask_variant_to_string(MaskVariant v) {
  switch (v) {
    case MaskVariant::kConsecutiveGaussian: return "consecutive-difference";
    case MaskVariant::kCumulativeGaussian: return "cumulative";
    case MaskVariant::kIdeal: return "ideal";
    case MaskVariant::kButterworth: return "butterworth";
  }
  fail("bad mask variant value");
}

namespace {

double radius2(int u, int v, int h, int w) {
  const double du = u - h / 2;
  const double dv = v - w / 2;
  return du * du + dv * dv;
}

// Gaussian low-pass with cutoff d; d == 0 means the degenerate all-zero mask.
double gauss_lp(double r2, double d) {
  if (d <= 0.0) return 0.0;
  return std::exp(-r2 / (2.0 * d * d));
}

double butter_lp(double r2, double d) {
  if (d <= 0.0) return 0.0;
  // order-2 low-pass: 1 / (1 + (r/d)^4)
  const double q = r2 / (d * d);
  return 1.0 / (1.0 + q * q);
}

}  // namespace

MaskSet make_mask_set(int h, int w, int q, MaskVariant variant) {
  FCVSR_CHECK(h >= 1 && w >= 1, "mask set needs positive spatial dims");
  FCVSR_CHECK(q >= 1, "mask set needs at least one band");
  MaskSet ms;
  ms.h = h;
  ms.w = w;
  ms.variant = variant;
  const double dmax = std::sqrt(0.25 * h * h + 0.25 * w * w);
  for (int j = 1; j <= q; ++j) ms.cutoffs.push_back(j * dmax / q);

  ms.masks.reserve(static_cast<size_t>(q));
  for (int j = 1; j <= q; ++j) {
    Tensor m({h, w});
    const double dj = ms.cutoffs[static_cast<size_t>(j - 1)];
    const double dprev = j >= 2 ? ms.cutoffs[static_cast<size_t>(j - 2)] : 0.0;
    for (int u = 0; u < h; ++u) {
      for (int v = 0; v < w; ++v) {
        const double r2 = radius2(u, v, h, w);
        double val = 0.0;
        switch (variant) {
          case MaskVariant::kConsecutiveGaussian:
            val = gauss_lp(r2, dj) - gauss_lp(r2, dprev);
            break;
          case MaskVariant::kCumulativeGaussian: {
            val = gauss_lp(r2, dj);
            for (int l = 1; l < j; ++l) val -= gauss_lp(r2, ms.cutoffs[static_cast<size_t>(l - 1)]);
            break;
          }
          case MaskVariant::kIdeal: {
            const double r = std::sqrt(r2);
            val = (r <= dj && (j == 1 || r > dprev)) ? 1.0 : 0.0;
            break;
          }
          case MaskVariant::kButterworth:
            val = butter_lp(r2, dj) - butter_lp(r2, dprev);
            break;
        }
        m.v[static_cast<size_t>(u) * w + v] = val;
      }
    }
    ms.masks.push_back(std::move(m));
  }
  return ms;
}

FrequencyFeature fft2_feature(const Tensor& x) {
  FCVSR_CHECK(x.rank() == 3, "fft2_feature expects {h,w,c}, got " + shape_str(x.shape));
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  FrequencyFeature f{Tensor({h, w, c}), Tensor({h, w, c})};
  std::vector<cd> plane(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        plane[static_cast<size_t>(y) * w + xw] = cd(x.at(y, xw, ch), 0.0);
    fft::fft2(plane, h, w, false);
    fft::fftshift2(plane, h, w);
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw) {
        f.real.at(y, xw, ch) = plane[static_cast<size_t>(y) * w + xw].real();
        f.imag.at(y, xw, ch) = plane[static_cast<size_t>(y) * w + xw].imag();
      }
  }
  return f;
}

Tensor ifft2_feature_real(const FrequencyFeature& f) {
  check_same_shape(f.real, f.imag, "ifft2_feature_real");
  const int h = f.real.dim(0), w = f.real.dim(1), c = f.real.dim(2);
  Tensor out({h, w, c});
  std::vector<cd> plane(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        plane[static_cast<size_t>(y) * w + xw] = cd(f.real.at(y, xw, ch), f.imag.at(y, xw, ch));
    fft::ifftshift2(plane, h, w);
    fft::fft2(plane, h, w, true);
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        out.at(y, xw, ch) = plane[static_cast<size_t>(y) * w + xw].real();
  }
  return out;
}

Tensor band_filter(const Tensor& x, const Tensor& mask) {
  FCVSR_CHECK(x.rank() == 3, "band_filter expects {h,w,c}");
  FCVSR_CHECK(mask.rank() == 2 && mask.dim(0) == x.dim(0) && mask.dim(1) == x.dim(1),
              "band_filter mask must be {h,w} matching the input");
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor out({h, w, c});
  std::vector<cd> plane(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        plane[static_cast<size_t>(y) * w + xw] = cd(x.at(y, xw, ch), 0.0);
    fft::fft2(plane, h, w, false);
    fft::fftshift2(plane, h, w);
    for (size_t i = 0; i < plane.size(); ++i) plane[i] *= mask.v[i];
    fft::ifftshift2(plane, h, w);
    fft::fft2(plane, h, w, true);
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        out.at(y, xw, ch) = plane[static_cast<size_t>(y) * w + xw].real();
  }
  return out;
}

std::vector<Tensor> decompose(const Tensor& x, const MaskSet& ms) {
  FCVSR_CHECK(x.rank() == 3 && x.dim(0) == ms.h && x.dim(1) == ms.w,
              "decompose input does not match the mask set geometry");
  std::vector<Tensor> bands;
  bands.reserve(ms.masks.size());
  for (const auto& m : ms.masks) bands.push_back(band_filter(x, m));
  return bands;
}

namespace {

Tensor pad_to_even(const Tensor& x) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const int ph = h + (h & 1), pw = w + (w & 1);
  if (ph == h && pw == w) return x;
  Tensor out({ph, pw, c});
  for (int y = 0; y < ph; ++y) {
    const int sy = reflect_index(y, h);
    for (int xw = 0; xw < pw; ++xw) {
      const int sx = reflect_index(xw, w);
      for (int ch = 0; ch < c; ++ch) out.at(y, xw, ch) = x.at(sy, sx, ch);
    }
  }
  return out;
}

}  // namespace

WaveletSubbands dwt2(const Tensor& x) {
  FCVSR_CHECK(x.rank() == 3, "dwt2 expects {h,w,c}");
  WaveletSubbands sb;
  sb.orig_h = x.dim(0);
  sb.orig_w = x.dim(1);
  Tensor p = pad_to_even(x);
  const int h = p.dim(0), w = p.dim(1), c = p.dim(2);
  const int hh = h / 2, hw = w / 2;
  sb.ll = Tensor({hh, hw, c});
  sb.lh = Tensor({hh, hw, c});
  sb.hl = Tensor({hh, hw, c});
  sb.hh = Tensor({hh, hw, c});
  for (int i = 0; i < hh; ++i)
    for (int j = 0; j < hw; ++j)
      for (int ch = 0; ch < c; ++ch) {
        const double a = p.at(2 * i, 2 * j, ch);
        const double b = p.at(2 * i, 2 * j + 1, ch);
        const double cc = p.at(2 * i + 1, 2 * j, ch);
        const double d = p.at(2 * i + 1, 2 * j + 1, ch);
        sb.ll.at(i, j, ch) = 0.5 * (a + b + cc + d);
        sb.lh.at(i, j, ch) = 0.5 * (a - b + cc - d);  // horizontal detail
        sb.hl.at(i, j, ch) = 0.5 * (a + b - cc - d);  // vertical detail
        sb.hh.at(i, j, ch) = 0.5 * (a - b - cc + d);
      }
  return sb;
}

Tensor idwt2(const WaveletSubbands& sb) {
  check_same_shape(sb.ll, sb.lh, "idwt2");
  check_same_shape(sb.ll, sb.hl, "idwt2");
  check_same_shape(sb.ll, sb.hh, "idwt2");
  const int hh = sb.ll.dim(0), hw = sb.ll.dim(1), c = sb.ll.dim(2);
  Tensor p({hh * 2, hw * 2, c});
  for (int i = 0; i < hh; ++i)
    for (int j = 0; j < hw; ++j)
      for (int ch = 0; ch < c; ++ch) {
        const double ll = sb.ll.at(i, j, ch);
        const double lh = sb.lh.at(i, j, ch);
        const double hl = sb.hl.at(i, j, ch);
        const double hhv = sb.hh.at(i, j, ch);
        p.at(2 * i, 2 * j, ch) = 0.5 * (ll + lh + hl + hhv);
        p.at(2 * i, 2 * j + 1, ch) = 0.5 * (ll - lh + hl - hhv);
        p.at(2 * i + 1, 2 * j, ch) = 0.5 * (ll + lh - hl - hhv);
        p.at(2 * i + 1, 2 * j + 1, ch) = 0.5 * (ll - lh - hl + hhv);
      }
  const int oh = sb.orig_h > 0 ? sb.orig_h : hh * 2;
  const int ow = sb.orig_w > 0 ? sb.orig_w : hw * 2;
  if (oh == hh * 2 && ow == hw * 2) return p;
  Tensor out({oh, ow, c});
  for (int y = 0; y < oh; ++y)
    for (int xw = 0; xw < ow; ++xw)
      for (int ch = 0; ch < c; ++ch) out.at(y, xw, ch) = p.at(y, xw, ch);
  return out;
}

Tensor mean_filter(const Tensor& x, int size) {
  FCVSR_CHECK(x.rank() == 3, "mean_filter expects {h,w,c}");
  FCVSR_CHECK(size >= 1 && (size & 1), "mean_filter size must be odd");
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const int r = size / 2;
  Tensor out({h, w, c});
  const double inv = 1.0 / (size * size);
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx)
            acc += x.at(reflect_index(y + dy, h), reflect_index(xw + dx, w), ch);
        out.at(y, xw, ch) = acc * inv;
      }
  return out;
}

}  // namespace fcvsr
