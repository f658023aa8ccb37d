#include "fcvsr/fft.hpp"

#include <cmath>
#include <cstring>
#include <map>

namespace fcvsr::fft {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// One twiddle table per (n, direction), grown lazily and kept for the process
// lifetime. Sizes in this codebase are tiny (<= a few hundred).
const std::vector<cd>& twiddles(int n, bool inverse) {
  static std::map<std::pair<int, bool>, std::vector<cd>> cache;
  auto key = std::make_pair(n, inverse);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cd> w(static_cast<size_t>(n));
  const double sign = inverse ? 1.0 : -1.0;
  for (int k = 0; k < n; ++k) {
    double ang = sign * 2.0 * kPi * k / n;
    w[static_cast<size_t>(k)] = cd(std::cos(ang), std::sin(ang));
  }
  it = cache.emplace(key, std::move(w)).first;
  return it->second;
}

void fft_pow2(cd* a, int n, bool inverse) {
  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const auto& w = twiddles(n, inverse);
  for (int len = 2; len <= n; len <<= 1) {
    const int step = n / len;
    for (int i = 0; i < n; i += len) {
      for (int k = 0; k < len / 2; ++k) {
        cd u = a[i + k];
        cd t = a[i + k + len / 2] * w[static_cast<size_t>(k * step)];
        a[i + k] = u + t;
        a[i + k + len / 2] = u - t;
      }
    }
  }
}

void dft_naive(cd* a, int n, bool inverse) {
  const auto& w = twiddles(n, inverse);
  std::vector<cd> out(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    cd acc(0.0, 0.0);
    int idx = 0;
    for (int j = 0; j < n; ++j) {
      acc += a[j] * w[static_cast<size_t>(idx)];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out[static_cast<size_t>(k)] = acc;
  }
  std::memcpy(a, out.data(), sizeof(cd) * static_cast<size_t>(n));
}

void rotate_rows(std::vector<cd>& plane, int h, int w, int shift) {
  if (shift == 0) return;
  std::vector<cd> tmp(plane.begin(), plane.end());
  for (int y = 0; y < h; ++y) {
    int src = (y - shift) % h;
    if (src < 0) src += h;
    std::memcpy(&plane[static_cast<size_t>(y) * w], &tmp[static_cast<size_t>(src) * w],
                sizeof(cd) * static_cast<size_t>(w));
  }
}

void rotate_cols(std::vector<cd>& plane, int h, int w, int shift) {
  if (shift == 0) return;
  std::vector<cd> row(static_cast<size_t>(w));
  for (int y = 0; y < h; ++y) {
    cd* p = &plane[static_cast<size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      int src = (x - shift) % w;
      if (src < 0) src += w;
      row[static_cast<size_t>(x)] = p[src];
    }
    std::memcpy(p, row.data(), sizeof(cd) * static_cast<size_t>(w));
  }
}

}  // namespace

void fft_inplace(cd* a, int n, bool inverse) {
  if (n == 1) return;
  if (is_pow2(n))
    fft_pow2(a, n, inverse);
  else
    dft_naive(a, n, inverse);
  if (inverse) {
    const double inv = 1.0 / n;
    for (int i = 0; i < n; ++i) a[i] *= inv;
  }
}

void fft2(std::vector<cd>& plane, int h, int w, bool inverse) {
  for (int y = 0; y < h; ++y) fft_inplace(&plane[static_cast<size_t>(y) * w], w, inverse);
  std::vector<cd> col(static_cast<size_t>(h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) col[static_cast<size_t>(y)] = plane[static_cast<size_t>(y) * w + x];
    fft_inplace(col.data(), h, inverse);
    for (int y = 0; y < h; ++y) plane[static_cast<size_t>(y) * w + x] = col[static_cast<size_t>(y)];
  }
}

void fftshift2(std::vector<cd>& plane, int h, int w) {
  rotate_rows(plane, h, w, h / 2);
  rotate_cols(plane, h, w, w / 2);
}

void ifftshift2(std::vector<cd>& plane, int h, int w) {
  rotate_rows(plane, h, w, -(h / 2));
  rotate_cols(plane, h, w, -(w / 2));
}

}  // namespace fcvsr::fft
