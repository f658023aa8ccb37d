#pragma once

#include "fcvsr/autograd.hpp"
#include "fcvsr/config.hpp"

namespace fcvsr::losses {

// Smooth L1-like penalty: mean over elements of sqrt(d^2 + eps^2).
Var charbonnier(Var pred, Var target, double eps);

// Contrastive penalty over Haar subbands. The prediction's detail bands are
// pulled toward the reference and pushed away from the bicubic upsample's
// detail bands; the low-pass band treats both reference and upsample as
// positives (the upsample's low frequencies are already trustworthy).
Var frequency_contrast(Var sr, Var hr, Var up, const LossConfig& cfg);

struct LossParts {
  Var total;        // spatial + alpha * contrast
  Var spatial;
  Var contrast;     // scalar 0 when alpha == 0
};

LossParts total_loss(Var sr, Var hr, Var up, const LossConfig& cfg);

}  // namespace fcvsr::losses
