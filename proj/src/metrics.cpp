#include "fcvsr/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace fcvsr::metrics {

double psnr(const Tensor& a, const Tensor& b, double peak) {
  check_same_shape(a, b, "psnr");
  FCVSR_CHECK(peak > 0.0, "psnr: peak must be positive");
  double mse = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    const double d = a.v[i] - b.v[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.numel());
  if (mse <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(peak * peak / mse));
}

namespace {

std::vector<double> gaussian_window(int n, double sigma) {
  std::vector<double> w(n);
  const double c = (n - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    w[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace

double ssim(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "ssim");
  FCVSR_CHECK(a.rank() == 3, "ssim: expected {h,w,c}");
  const int h = a.dim(0), w = a.dim(1), c = a.dim(2);
  const int win = 11;
  FCVSR_CHECK(h >= win && w >= win, "ssim: image smaller than the 11x11 window");
  const std::vector<double> g = gaussian_window(win, 1.5);
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double total = 0.0;
  int64_t count = 0;
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y + win <= h; ++y) {
      for (int x = 0; x + win <= w; ++x) {
        double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
        for (int j = 0; j < win; ++j) {
          for (int i = 0; i < win; ++i) {
            const double wgt = g[j] * g[i];
            const double va = a.at(y + j, x + i, ch);
            const double vb = b.at(y + j, x + i, ch);
            mu_a += wgt * va;
            mu_b += wgt * vb;
            aa += wgt * va * va;
            bb += wgt * vb * vb;
            ab += wgt * va * vb;
          }
        }
        const double var_a = aa - mu_a * mu_a;
        const double var_b = bb - mu_b * mu_b;
        const double cov = ab - mu_a * mu_b;
        const double num = (2 * mu_a * mu_b + c1) * (2 * cov + c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        total += num / den;
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

namespace {

std::string substitute(std::string s, const std::string& key, const std::string& value) {
  size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
  return s;
}

}  // namespace

std::optional<double> vmaf_external(const std::string& cmd_template,
                                    const std::string& ref_path,
                                    const std::string& dist_path) {
  std::string cmd = substitute(cmd_template, "{ref}", ref_path);
  cmd = substitute(cmd, "{dist}", dist_path);

  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    std::fprintf(stderr, "warning: failed to launch scorer: %s\n", cmd.c_str());
    return std::nullopt;
  }
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  if (status != 0) {
    std::fprintf(stderr, "warning: scorer exited with status %d: %s\n", status, cmd.c_str());
    return std::nullopt;
  }

  // last token that parses as a number wins
  std::istringstream iss(out);
  std::string tok;
  std::optional<double> score;
  while (iss >> tok) {
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used == tok.size() && std::isfinite(v)) score = v;
    } catch (...) {
    }
  }
  if (!score) std::fprintf(stderr, "warning: scorer printed no numeric score: %s\n", cmd.c_str());
  return score;
}

}  // namespace fcvsr::metrics
