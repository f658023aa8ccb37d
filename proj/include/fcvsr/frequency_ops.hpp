#pragma once
#include <string>
#include <vector>

#include "fcvsr/tensor.hpp"

namespace fcvsr {

enum class MaskVariant {
  kConsecutiveGaussian,  // difference of consecutive Gaussian low-passes (default)
  kCumulativeGaussian,   // each band subtracts the sum of all previous low-passes
  kIdeal,                // hard annuli
  kButterworth,          // difference of consecutive order-2 Butterworth low-passes
};

MaskVariant mask_variant_from_string(const std::string& s);
std::string mask_variant_to_string(MaskVariant v);

// Centered radial masks over an h*w spectrum, DC at (h/2, w/2).
struct MaskSet {
  int h = 0, w = 0;
  MaskVariant variant = MaskVariant::kConsecutiveGaussian;
  std::vector<double> cutoffs;  // d_1..d_Q
  std::vector<Tensor> masks;    // Q tensors, each {h, w}
};

MaskSet make_mask_set(int h, int w, int q, MaskVariant variant);

// Spectrum of a real feature map, stored as separate centered re/im planes.
struct FrequencyFeature {
  Tensor real;  // {h, w, c}
  Tensor imag;  // {h, w, c}
};

FrequencyFeature fft2_feature(const Tensor& x);          // {h,w,c} -> centered spectrum
Tensor ifft2_feature_real(const FrequencyFeature& f);    // real part of the inverse

// ifft2(mask . fft2(x)) per channel, real output. Self-adjoint for real masks,
// so the same routine backs both the forward pass and the gradient.
Tensor band_filter(const Tensor& x, const Tensor& mask);

// All Q bands of one feature map.
std::vector<Tensor> decompose(const Tensor& x, const MaskSet& ms);

// Single-level orthonormal Haar transform. Odd inputs get one row/col of
// mirror padding; idwt2 restores the original size.
struct WaveletSubbands {
  Tensor ll, lh, hl, hh;  // each {ceil(h/2), ceil(w/2), c}
  int orig_h = 0, orig_w = 0;
};

WaveletSubbands dwt2(const Tensor& x);
Tensor idwt2(const WaveletSubbands& sb);

// Box filter with mirrored borders; size must be odd.
Tensor mean_filter(const Tensor& x, int size);

}  // namespace fcvsr
