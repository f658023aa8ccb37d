#include "fcvsr/ops.hpp"

#include <algorithm>
#include <cmath>

#include "fcvsr/fft.hpp"

namespace fcvsr::ops {

using fft::cd;

namespace {

Tape& tp(Var v) {
  FCVSR_CHECK(v.ok(), "op on an empty var");
  return *v.tape;
}

}  // namespace

Var add(Var a, Var b) {
  Tape& t = tp(a);
  check_same_shape(t.val(a), t.val(b), "add");
  Tensor out = t.val(a);
  const Tensor& bv = t.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += bv.v[i];
  int pa = a.id, pb = b.id;
  return t.make(std::move(out), {a, b}, [pa, pb](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    tape.accum(pa, g);
    tape.accum(pb, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tp(a);
  check_same_shape(t.val(a), t.val(b), "sub");
  Tensor out = t.val(a);
  const Tensor& bv = t.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] -= bv.v[i];
  int pa = a.id, pb = b.id;
  return t.make(std::move(out), {a, b}, [pa, pb](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    tape.accum(pa, g);
    Tensor ng = g;
    for (auto& e : ng.v) e = -e;
    tape.accum(pb, ng);
  });
}

Var mul(Var a, Var b) {
  Tape& t = tp(a);
  check_same_shape(t.val(a), t.val(b), "mul");
  Tensor out = t.val(a);
  const Tensor& bv = t.val(b);
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= bv.v[i];
  int pa = a.id, pb = b.id;
  return t.make(std::move(out), {a, b}, [pa, pb](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& av = tape.val(Var{&tape, pa});
    const Tensor& bv2 = tape.val(Var{&tape, pb});
    Tensor ga = g, gb = g;
    for (size_t i = 0; i < g.v.size(); ++i) {
      ga.v[i] = g.v[i] * bv2.v[i];
      gb.v[i] = g.v[i] * av.v[i];
    }
    tape.accum(pa, ga);
    tape.accum(pb, gb);
  });
}

Var scale(Var a, double s) {
  Tape& t = tp(a);
  Tensor out = t.val(a);
  for (auto& e : out.v) e *= s;
  int pa = a.id;
  return t.make(std::move(out), {a}, [pa, s](Tape& tape, int id) {
    Tensor g = tape.grad(Var{&tape, id});
    for (auto& e : g.v) e *= s;
    tape.accum(pa, g);
  });
}

Var add_scalar(Var a, double s) {
  Tape& t = tp(a);
  Tensor out = t.val(a);
  for (auto& e : out.v) e += s;
  int pa = a.id;
  return t.make(std::move(out), {a}, [pa](Tape& tape, int id) {
    tape.accum(pa, tape.grad(Var{&tape, id}));
  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var relu(Var a) {
  Tape& t = tp(a);
  Tensor out = t.val(a);
  for (auto& e : out.v) e = e > 0.0 ? e : 0.0;
  int pa = a.id;
  return t.make(std::move(out), {a}, [pa](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& x = tape.val(Var{&tape, pa});
    Tensor gx = g;
    for (size_t i = 0; i < g.v.size(); ++i) gx.v[i] = x.v[i] > 0.0 ? g.v[i] : 0.0;
    tape.accum(pa, gx);
  });
}

Var sigmoid(Var a) {
  Tape& t = tp(a);
  Tensor out = t.val(a);
  for (auto& e : out.v) e = 1.0 / (1.0 + std::exp(-e));
  int pa = a.id;
  Tensor saved = out;  // y, reused for the derivative
  return t.make(std::move(out), {a}, [pa, saved = std::move(saved)](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx = g;
    for (size_t i = 0; i < g.v.size(); ++i) {
      const double y = saved.v[i];
      gx.v[i] = g.v[i] * y * (1.0 - y);
    }
    tape.accum(pa, gx);
  });
}

Var abs_v(Var a) {
  Tape& t = tp(a);
  Tensor out = t.val(a);
  for (auto& e : out.v) e = std::fabs(e);
  int pa = a.id;
  return t.make(std::move(out), {a}, [pa](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& x = tape.val(Var{&tape, pa});
    Tensor gx = g;
    // subgradient 0 at the kink
    for (size_t i = 0; i < g.v.size(); ++i)
      gx.v[i] = x.v[i] > 0.0 ? g.v[i] : (x.v[i] < 0.0 ? -g.v[i] : 0.0);
    tape.accum(pa, gx);
  });
}

Var sqrt_v(Var a) {
  Tape& t = tp(a);
  Tensor out = t.val(a);
  for (auto& e : out.v) {
    FCVSR_CHECK(e >= 0.0, "sqrt of a negative value");
    e = std::sqrt(e);
  }
  int pa = a.id;
  Tensor saved = out;
  return t.make(std::move(out), {a}, [pa, saved = std::move(saved)](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx = g;
    for (size_t i = 0; i < g.v.size(); ++i) gx.v[i] = 0.5 * g.v[i] / saved.v[i];
    tape.accum(pa, gx);
  });
}

Var mean_all(Var a) {
  Tape& t = tp(a);
  const Tensor& x = t.val(a);
  double acc = 0.0;
  for (double e : x.v) acc += e;
  const double inv = 1.0 / static_cast<double>(x.numel());
  int pa = a.id;
  return t.make(Tensor::full({1}, acc * inv), {a}, [pa, inv](Tape& tape, int id) {
    const double g = tape.grad(Var{&tape, id}).v[0] * inv;
    Tensor gx = Tensor::full(tape.val(Var{&tape, pa}).shape, g);
    tape.accum(pa, gx);
  });
}

Var sum_all(Var a) {
  Tape& t = tp(a);
  const Tensor& x = t.val(a);
  double acc = 0.0;
  for (double e : x.v) acc += e;
  int pa = a.id;
  return t.make(Tensor::full({1}, acc), {a}, [pa](Tape& tape, int id) {
    const double g = tape.grad(Var{&tape, id}).v[0];
    Tensor gx = Tensor::full(tape.val(Var{&tape, pa}).shape, g);
    tape.accum(pa, gx);
  });
}

Var concat_channels(const std::vector<Var>& xs) {
  FCVSR_CHECK(!xs.empty(), "concat of nothing");
  Tape& t = tp(xs[0]);
  const int h = t.val(xs[0]).dim(0), w = t.val(xs[0]).dim(1);
  int ctot = 0;
  for (const Var& x : xs) {
    const Tensor& xv = t.val(x);
    FCVSR_CHECK(xv.rank() == 3 && xv.dim(0) == h && xv.dim(1) == w,
                "concat_channels: incompatible shapes");
    ctot += xv.dim(2);
  }
  Tensor out({h, w, ctot});
  std::vector<int> offs;
  int off = 0;
  for (const Var& x : xs) {
    const Tensor& xv = t.val(x);
    const int c = xv.dim(2);
    offs.push_back(off);
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        for (int ch = 0; ch < c; ++ch) out.at(y, xw, off + ch) = xv.at(y, xw, ch);
    off += c;
  }
  std::vector<int> pids;
  for (const Var& x : xs) pids.push_back(x.id);
  return t.make(std::move(out), xs, [pids, offs](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const int h2 = g.dim(0), w2 = g.dim(1);
    for (size_t i = 0; i < pids.size(); ++i) {
      const Tensor& xv = tape.val(Var{&tape, pids[i]});
      const int c = xv.dim(2);
      Tensor gx({h2, w2, c});
      for (int y = 0; y < h2; ++y)
        for (int xw = 0; xw < w2; ++xw)
          for (int ch = 0; ch < c; ++ch) gx.at(y, xw, ch) = g.at(y, xw, offs[i] + ch);
      tape.accum(pids[i], gx);
    }
  });
}

Var slice_channels(Var x, int c0, int len) {
  Tape& t = tp(x);
  const Tensor& xv = t.val(x);
  FCVSR_CHECK(xv.rank() == 3, "slice_channels expects {h,w,c}");
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  FCVSR_CHECK(c0 >= 0 && len >= 1 && c0 + len <= c, "slice_channels: range out of bounds");
  Tensor out({h, w, len});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < len; ++ch) out.at(y, xw, ch) = xv.at(y, xw, c0 + ch);
  int pa = x.id;
  return t.make(std::move(out), {x}, [pa, c0, len](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx = Tensor::zeros(tape.val(Var{&tape, pa}).shape);
    const int h2 = g.dim(0), w2 = g.dim(1);
    for (int y = 0; y < h2; ++y)
      for (int xw = 0; xw < w2; ++xw)
        for (int ch = 0; ch < len; ++ch) gx.at(y, xw, c0 + ch) = g.at(y, xw, ch);
    tape.accum(pa, gx);
  });
}

Var reshape(Var x, std::vector<int> shape) {
  Tape& t = tp(x);
  const Tensor& xv = t.val(x);
  FCVSR_CHECK(Tensor::numel_of(shape) == xv.numel(), "reshape: element count mismatch");
  Tensor out(shape);
  out.v = xv.v;
  int pa = x.id;
  return t.make(std::move(out), {x}, [pa](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx(tape.val(Var{&tape, pa}).shape);
    gx.v = g.v;
    tape.accum(pa, gx);
  });
}

Var stack_scalars(const std::vector<Var>& xs) {
  FCVSR_CHECK(!xs.empty(), "stack of nothing");
  Tape& t = tp(xs[0]);
  Tensor out({static_cast<int>(xs.size())});
  for (size_t i = 0; i < xs.size(); ++i) {
    FCVSR_CHECK(t.val(xs[i]).numel() == 1, "stack_scalars expects scalars");
    out.v[i] = t.val(xs[i]).v[0];
  }
  std::vector<int> pids;
  for (const Var& x : xs) pids.push_back(x.id);
  return t.make(std::move(out), xs, [pids](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    for (size_t i = 0; i < pids.size(); ++i) tape.accum(pids[i], Tensor::full({1}, g.v[i]));
  });
}

Var logsumexp(Var x) {
  Tape& t = tp(x);
  const Tensor& xv = t.val(x);
  FCVSR_CHECK(xv.rank() == 1, "logsumexp expects a vector");
  double m = xv.v[0];
  for (double e : xv.v) m = std::max(m, e);
  double s = 0.0;
  for (double e : xv.v) s += std::exp(e - m);
  const double y = m + std::log(s);
  int pa = x.id;
  return t.make(Tensor::full({1}, y), {x}, [pa, y](Tape& tape, int id) {
    const double g = tape.grad(Var{&tape, id}).v[0];
    const Tensor& xv2 = tape.val(Var{&tape, pa});
    Tensor gx(xv2.shape);
    for (size_t i = 0; i < xv2.v.size(); ++i) gx.v[i] = g * std::exp(xv2.v[i] - y);
    tape.accum(pa, gx);
  });
}

// ---- frequency-domain ops ----

namespace {

void load_plane(const Tensor& x, int ch, std::vector<cd>& plane) {
  const int h = x.dim(0), w = x.dim(1);
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      plane[static_cast<size_t>(y) * w + xw] = cd(x.at(y, xw, ch), 0.0);
}

}  // namespace

Var fft2_reim(Var x) {
  Tape& t = tp(x);
  const Tensor& xv = t.val(x);
  FCVSR_CHECK(xv.rank() == 3, "fft2_reim expects {h,w,c}");
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  FrequencyFeature f = fft2_feature(xv);
  Tensor out({h, w, 2 * c});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch) {
        out.at(y, xw, ch) = f.real.at(y, xw, ch);
        out.at(y, xw, c + ch) = f.imag.at(y, xw, ch);
      }
  int pa = x.id;
  return t.make(std::move(out), {x}, [pa, h, w, c](Tape& tape, int id) {
    // adjoint: re(FFT(ishift(g_re))) + im(FFT(ishift(g_im))) per channel
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx({h, w, c});
    std::vector<cd> pr(static_cast<size_t>(h) * w), pi(pr.size());
    for (int ch = 0; ch < c; ++ch) {
      for (int y = 0; y < h; ++y)
        for (int xw = 0; xw < w; ++xw) {
          pr[static_cast<size_t>(y) * w + xw] = cd(g.at(y, xw, ch), 0.0);
          pi[static_cast<size_t>(y) * w + xw] = cd(g.at(y, xw, c + ch), 0.0);
        }
      fft::ifftshift2(pr, h, w);
      fft::ifftshift2(pi, h, w);
      fft::fft2(pr, h, w, false);
      fft::fft2(pi, h, w, false);
      for (int y = 0; y < h; ++y)
        for (int xw = 0; xw < w; ++xw)
          gx.at(y, xw, ch) = pr[static_cast<size_t>(y) * w + xw].real() +
                             pi[static_cast<size_t>(y) * w + xw].imag();
    }
    tape.accum(pa, gx);
  });
}

Var ifft2_reim_to_real(Var z) {
  Tape& t = tp(z);
  const Tensor& zv = t.val(z);
  FCVSR_CHECK(zv.rank() == 3 && zv.dim(2) % 2 == 0, "ifft2_reim_to_real expects {h,w,2c}");
  const int h = zv.dim(0), w = zv.dim(1), c = zv.dim(2) / 2;
  Tensor out({h, w, c});
  std::vector<cd> plane(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        plane[static_cast<size_t>(y) * w + xw] = cd(zv.at(y, xw, ch), zv.at(y, xw, c + ch));
    fft::ifftshift2(plane, h, w);
    fft::fft2(plane, h, w, true);
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw) out.at(y, xw, ch) = plane[static_cast<size_t>(y) * w + xw].real();
  }
  int pa = z.id;
  return t.make(std::move(out), {z}, [pa, h, w, c](Tape& tape, int id) {
    // adjoint: shift(conj(ifft2(g))) split back into re/im channel halves
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gz({h, w, 2 * c});
    std::vector<cd> plane(static_cast<size_t>(h) * w);
    for (int ch = 0; ch < c; ++ch) {
      load_plane(g, ch, plane);
      fft::fft2(plane, h, w, true);
      for (auto& e : plane) e = std::conj(e);
      fft::fftshift2(plane, h, w);
      for (int y = 0; y < h; ++y)
        for (int xw = 0; xw < w; ++xw) {
          gz.at(y, xw, ch) = plane[static_cast<size_t>(y) * w + xw].real();
          gz.at(y, xw, c + ch) = plane[static_cast<size_t>(y) * w + xw].imag();
        }
    }
    tape.accum(pa, gz);
  });
}

Var band_filter(Var x, const Tensor& mask) {
  Tape& t = tp(x);
  Tensor out = fcvsr::band_filter(t.val(x), mask);
  int pa = x.id;
  Tensor m = mask;
  return t.make(std::move(out), {x}, [pa, m = std::move(m)](Tape& tape, int id) {
    // real centered masks make this operator symmetric
    tape.accum(pa, fcvsr::band_filter(tape.grad(Var{&tape, id}), m));
  });
}

Var dwt2_haar(Var x) {
  Tape& t = tp(x);
  const Tensor& xv = t.val(x);
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  WaveletSubbands sb = dwt2(xv);
  const int h2 = sb.ll.dim(0), w2 = sb.ll.dim(1);
  Tensor out({h2, w2, 4 * c});
  for (int y = 0; y < h2; ++y)
    for (int xw = 0; xw < w2; ++xw)
      for (int ch = 0; ch < c; ++ch) {
        out.at(y, xw, ch) = sb.ll.at(y, xw, ch);
        out.at(y, xw, c + ch) = sb.lh.at(y, xw, ch);
        out.at(y, xw, 2 * c + ch) = sb.hl.at(y, xw, ch);
        out.at(y, xw, 3 * c + ch) = sb.hh.at(y, xw, ch);
      }
  int pa = x.id;
  return t.make(std::move(out), {x}, [pa, h, w, c, h2, w2](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    WaveletSubbands gs;
    gs.ll = Tensor({h2, w2, c});
    gs.lh = Tensor({h2, w2, c});
    gs.hl = Tensor({h2, w2, c});
    gs.hh = Tensor({h2, w2, c});
    gs.orig_h = 2 * h2;  // reconstruct at padded size, fold below
    gs.orig_w = 2 * w2;
    for (int y = 0; y < h2; ++y)
      for (int xw = 0; xw < w2; ++xw)
        for (int ch = 0; ch < c; ++ch) {
          gs.ll.at(y, xw, ch) = g.at(y, xw, ch);
          gs.lh.at(y, xw, ch) = g.at(y, xw, c + ch);
          gs.hl.at(y, xw, ch) = g.at(y, xw, 2 * c + ch);
          gs.hh.at(y, xw, ch) = g.at(y, xw, 3 * c + ch);
        }
    // orthonormal even-size transform is its own adjoint
    Tensor full = idwt2(gs);
    if (full.dim(0) == h && full.dim(1) == w) {
      tape.accum(pa, full);
      return;
    }
    Tensor gx({h, w, c});
    for (int y = 0; y < full.dim(0); ++y) {
      const int sy = reflect_index(y, h);
      for (int xw = 0; xw < full.dim(1); ++xw) {
        const int sx = reflect_index(xw, w);
        for (int ch = 0; ch < c; ++ch) gx.at(sy, sx, ch) += full.at(y, xw, ch);
      }
    }
    tape.accum(pa, gx);
  });
}

Var mean_filter(Var x, int size) {
  Tape& t = tp(x);
  Tensor out = fcvsr::mean_filter(t.val(x), size);
  int pa = x.id;
  return t.make(std::move(out), {x}, [pa, size](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const int h = g.dim(0), w = g.dim(1), c = g.dim(2);
    const int r = size / 2;
    const double inv = 1.0 / (size * size);
    Tensor gx(g.shape);
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        for (int ch = 0; ch < c; ++ch) {
          const double gv = g.at(y, xw, ch) * inv;
          for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
              gx.at(reflect_index(y + dy, h), reflect_index(xw + dx, w), ch) += gv;
        }
    tape.accum(pa, gx);
  });
}

}  // namespace fcvsr::ops
