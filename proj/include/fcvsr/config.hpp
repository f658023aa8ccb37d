#pragma once
#include <string>

#include "fcvsr/frequency_ops.hpp"

namespace fcvsr {

struct ModelConfig {
  int n_offsets = 6;     // motion-offset / adaptive-conv cascade depth (N)
  int q_bands = 8;       // spectral decomposition bands (Q)
  int r_groups = 10;     // reconstruction residual groups (R)
  int k_taps = 5;        // separable adaptive kernel size (odd)
  int channels = 64;     // feature channels
  int img_channels = 3;  // 1 for luma-only datasets
  int scale = 4;
  double gamma = 0.2;    // enhancement-block residual scale
  MaskVariant mask_variant = MaskVariant::kConsecutiveGaussian;
  bool share_alignment = true;  // reuse one estimator/predictor across all three alignment calls

  // test hook: refinement Block/CA become identity maps (parameter-free),
  // making the whole refinement path a linear operator
  bool identity_hooks = false;

  // ablation switches
  bool no_alignment = false;    // replace the alignment tree with concat + fusion conv
  bool zero_offsets = false;    // drop the motion estimator; cascade warps with zero offsets
  bool no_refinement = false;   // bypass the multi-band refinement entirely
  bool no_feedback = false;     // enhancement keeps only the feedforward branch
  bool no_feedforward = false;  // enhancement keeps feedback branch + raw band

  void validate() const;
};

ModelConfig preset_fcvsr();    // N=6, Q=8, R=10
ModelConfig preset_fcvsr_s();  // N=4, Q=4, R=3

struct LossConfig {
  double alpha = 1.0;  // contrastive-loss weight
  double tau = 1.0;    // temperature
  double eps = 1e-4;   // Charbonnier penalty
  // ablations: drop the detail-band anchors or the low-band anchor term
  bool drop_detail_term = false;
  bool drop_base_term = false;

  void validate() const;
};

}  // namespace fcvsr
