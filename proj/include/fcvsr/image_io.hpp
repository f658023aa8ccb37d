#pragma once

#include <string>

#include "fcvsr/tensor.hpp"

namespace fcvsr::image_io {

// 8-bit PNG -> {h,w,1} or {h,w,3} doubles in [0,1]. Palette images are
// expanded, 16-bit depth reduced, alpha stripped.
Tensor read_png(const std::string& path);

// {h,w,1} or {h,w,3} in [0,1] -> 8-bit PNG (values clamped, rounded).
void write_png(const std::string& path, const Tensor& img);

}  // namespace fcvsr::image_io
