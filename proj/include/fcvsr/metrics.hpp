#pragma once

#include <optional>
#include <string>

#include "fcvsr/tensor.hpp"

namespace fcvsr::metrics {

// Peak signal-to-noise ratio over all elements, capped at 100 dB.
double psnr(const Tensor& a, const Tensor& b, double peak = 1.0);

// Mean structural similarity: 11x11 Gaussian window (sigma 1.5), K1=0.01,
// K2=0.03, data range 1.0. Windows are fully inside the image (no padding);
// channels are averaged. Throws if the image is smaller than the window.
double ssim(const Tensor& a, const Tensor& b);

// Runs an external scoring command with {ref}/{dist} placeholders substituted
// and parses the last floating-point token of its stdout. Returns nullopt (and
// warns on stderr) if the command fails or prints no number.
std::optional<double> vmaf_external(const std::string& cmd_template,
                                    const std::string& ref_path,
                                    const std::string& dist_path);

}  // namespace fcvsr::metrics
