#pragma once
#include <string>
#include <vector>

#include "fcvsr/config.hpp"
#include "fcvsr/nn.hpp"

namespace fcvsr::mgaa {

// Per-pixel separable kernels for the N cascade stages.
struct KernelSet {
  std::vector<Var> vertical;    // N entries, each {h,w,c,k}
  std::vector<Var> horizontal;  // N entries, each {h,w,c,k}
};

// Frequency-domain motion estimation between two same-shape features.
// Returns N offset fields {h,w,2} (dx, dy). With cfg.zero_offsets the
// estimator is removed and all offsets are zero constants.
std::vector<Var> motion_estimate(ParamContext& ctx, const ModelConfig& cfg,
                                 const std::string& prefix, Var ref, Var src);

// Two-conv head over the reference feature emitting a 2Nck vector per pixel,
// split into N (vertical, horizontal) kernel pairs. Bias starts as the center
// tap, so the cascade begins as an identity.
KernelSet predict_kernels(ParamContext& ctx, const ModelConfig& cfg,
                          const std::string& prefix, Var ref);

// Cascade: a_n = separable_adaptive_conv(warp(a_{n-1}, o_n), Kv_n, Kh_n).
// Empty offset list returns src unchanged.
Var mgac_align(Var src, const std::vector<Var>& offsets, const KernelSet& kernels);

// Bidirectional alignment of (left, right) onto center plus conv fusion.
Var mgaa_forward(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
                 Var left, Var center, Var right);

}  // namespace fcvsr::mgaa
