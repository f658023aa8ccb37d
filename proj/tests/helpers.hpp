#pragma once

#include <functional>
#include <vector>

#include "fcvsr/autograd.hpp"
#include "fcvsr/rng.hpp"
#include "fcvsr/tensor.hpp"

namespace testutil {

inline fcvsr::Tensor rand_tensor(std::vector<int> shape, uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
  fcvsr::Tensor t(std::move(shape));
  fcvsr::Rng rng(seed);
  for (auto& e : t.v) e = rng.uniform(lo, hi);
  return t;
}

inline double max_abs_diff(const fcvsr::Tensor& a, const fcvsr::Tensor& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, std::fabs(a.v[i] - b.v[i]));
  return m;
}

// Builds a scalar graph over one leaf and compares the analytic gradient with
// central finite differences on a deterministic subset of entries. Returns the
// worst relative error (absolute-floored so near-zero gradients do not blow
// up the ratio).
inline double fd_check(const fcvsr::Tensor& x0,
                       const std::function<fcvsr::Var(fcvsr::Tape&, fcvsr::Var)>& build,
                       int max_entries = 24, double eps = 1e-5) {
  using namespace fcvsr;
  Tensor analytic;
  {
    Tape tape;
    Var leaf = tape.leaf(x0, true);
    Var y = build(tape, leaf);
    tape.backward(y);
    analytic = tape.grad(leaf);
  }
  auto value_at = [&](const Tensor& x) {
    Tape tape;
    NoGrad ng(tape);
    Var leaf = tape.leaf(x, false);
    return tape.val(build(tape, leaf)).v[0];
  };

  const int64_t n = x0.numel();
  const int64_t stride = std::max<int64_t>(1, n / max_entries);
  double worst = 0.0;
  for (int64_t i = 0; i < n; i += stride) {
    Tensor xp = x0, xm = x0;
    xp.v[static_cast<size_t>(i)] += eps;
    xm.v[static_cast<size_t>(i)] -= eps;
    const double fd = (value_at(xp) - value_at(xm)) / (2.0 * eps);
    const double an = analytic.v[static_cast<size_t>(i)];
    const double err = std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-4});
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace testutil
