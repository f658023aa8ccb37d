#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcvsr {

[[noreturn]] void fail(const std::string& msg);

#define FCVSR_CHECK(cond, msg) \
  do { if (!(cond)) ::fcvsr::fail(msg); } while (0)

// Dense row-major tensor of doubles. Layout convention for feature maps is
// {h, w, c} with the channel index fastest, which keeps per-pixel channel
// vectors contiguous for the conv kernels.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(numel_of(shape)), 0.0);
  }

  static int64_t numel_of(const std::vector<int>& s);
  int64_t numel() const { return static_cast<int64_t>(v.size()); }

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, double x) {
    Tensor t(std::move(s));
    for (auto& e : t.v) e = x;
    return t;
  }

  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  // 3-d {h,w,c} accessor used throughout the feature-map code.
  double& at(int y, int x, int c) {
    return v[(static_cast<size_t>(y) * shape[1] + x) * shape[2] + c];
  }
  double at(int y, int x, int c) const {
    return v[(static_cast<size_t>(y) * shape[1] + x) * shape[2] + c];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

std::string shape_str(const std::vector<int>& s);

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  FCVSR_CHECK(a.shape == b.shape, std::string(where) + ": shape mismatch " +
                                      shape_str(a.shape) + " vs " + shape_str(b.shape));
}

// Mirror-without-edge-repeat index reflection, the border rule shared by conv
// padding, the mean filter, wavelet padding and temporal window sampling.
// n==1 degenerates to clamping.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

inline double clampd(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

}  // namespace fcvsr
