#include "fcvsr/nn.hpp"

#include <cmath>

#include "fcvsr/ops.hpp"

namespace fcvsr {

void round_f32(Tensor& t) {
  for (auto& e : t.v) e = static_cast<double>(static_cast<float>(e));
}

InitFn init_zeros() {
  return [](Tensor& t, Rng&) { std::fill(t.v.begin(), t.v.end(), 0.0); };
}

InitFn init_const(double v) {
  return [v](Tensor& t, Rng&) { std::fill(t.v.begin(), t.v.end(), v); };
}

InitFn init_he_uniform(int fan_in, double scale) {
  return [fan_in, scale](Tensor& t, Rng& rng) {
    const double bound = scale * std::sqrt(6.0 / fan_in);
    for (auto& e : t.v) e = rng.uniform(-bound, bound);
  };
}

Tensor& ParamStore::get_or_create(const std::string& name, const std::vector<int>& shape,
                                  const InitFn& init) {
  auto it = map_.find(name);
  if (it != map_.end()) {
    FCVSR_CHECK(it->second.shape == shape,
                "parameter '" + name + "' requested with shape " + shape_str(shape) +
                    " but stored as " + shape_str(it->second.shape));
    return it->second;
  }
  Tensor t(shape);
  Rng rng(mix_seed(seed_, fnv1a(name)));
  init(t, rng);
  round_f32(t);
  order_.push_back(name);
  return map_.emplace(name, std::move(t)).first->second;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = map_.find(name);
  FCVSR_CHECK(it != map_.end(), "unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = map_.find(name);
  FCVSR_CHECK(it != map_.end(), "unknown parameter '" + name + "'");
  return it->second;
}

int64_t ParamStore::total_params() const {
  int64_t n = 0;
  for (const auto& name : order_) n += map_.at(name).numel();
  return n;
}

Var ParamContext::p(const std::string& name, const std::vector<int>& shape, const InitFn& init) {
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  Tensor& master = store.get_or_create(name, shape, init);
  Var v = tape.leaf(master, !frozen);
  cache.emplace(name, v);
  return v;
}

namespace nn {

namespace {

inline double dot(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = s0 + s1 + s2 + s3;
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void axpy(double* y, const double* x, double s, int n) {
  for (int i = 0; i < n; ++i) y[i] += s * x[i];
}

Tensor reflect_pad(const Tensor& x, int r) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor p({h + 2 * r, w + 2 * r, c});
  for (int y = 0; y < h + 2 * r; ++y) {
    const int sy = reflect_index(y - r, h);
    for (int xw = 0; xw < w + 2 * r; ++xw) {
      const int sx = reflect_index(xw - r, w);
      const double* src = &x.v[(static_cast<size_t>(sy) * w + sx) * c];
      double* dst = &p.v[(static_cast<size_t>(y) * (w + 2 * r) + xw) * c];
      for (int ch = 0; ch < c; ++ch) dst[ch] = src[ch];
    }
  }
  return p;
}

}  // namespace

Var conv2d(Var x, Var w, Var b) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  const Tensor& wv = t.val(w);
  const Tensor& bv = t.val(b);
  FCVSR_CHECK(xv.rank() == 3 && wv.rank() == 4, "conv2d expects x {h,w,ci}, w {co,k,k,ci}");
  const int h = xv.dim(0), ww = xv.dim(1), ci = xv.dim(2);
  const int co = wv.dim(0), k = wv.dim(1);
  FCVSR_CHECK(wv.dim(2) == k && wv.dim(3) == ci, "conv2d weight shape mismatch");
  FCVSR_CHECK(k % 2 == 1, "conv2d kernel must be odd");
  FCVSR_CHECK(bv.rank() == 1 && bv.dim(0) == co, "conv2d bias shape mismatch");
  const int r = k / 2;
  const int pw = ww + 2 * r;

  Tensor padded = reflect_pad(xv, r);
  Tensor out({h, ww, co});
  for (int y = 0; y < h; ++y) {
    for (int xi = 0; xi < ww; ++xi) {
      double* orow = &out.v[(static_cast<size_t>(y) * ww + xi) * co];
      for (int oc = 0; oc < co; ++oc) {
        double acc = bv.v[static_cast<size_t>(oc)];
        const double* wbase = &wv.v[static_cast<size_t>(oc) * k * k * ci];
        for (int ky = 0; ky < k; ++ky) {
          const double* prow = &padded.v[(static_cast<size_t>(y + ky) * pw + xi) * ci];
          const double* wrow = &wbase[static_cast<size_t>(ky) * k * ci];
          for (int kx = 0; kx < k; ++kx)
            acc += dot(&prow[static_cast<size_t>(kx) * ci], &wrow[static_cast<size_t>(kx) * ci], ci);
        }
        orow[oc] = acc;
      }
    }
  }

  int px = x.id, pwid = w.id, pb = b.id;
  return t.make(std::move(out), {x, w, b},
                [px, pwid, pb, h, ww, ci, co, k, r, pw,
                 padded = std::move(padded)](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& wv2 = tape.val(Var{&tape, pwid});
    const bool need_x = tape.requires_grad(Var{&tape, px});
    const bool need_w = tape.requires_grad(Var{&tape, pwid});
    const bool need_b = tape.requires_grad(Var{&tape, pb});

    if (need_b) {
      Tensor& gb = tape.grad_buf(pb);
      for (int y = 0; y < h; ++y)
        for (int xi = 0; xi < ww; ++xi) {
          const double* grow = &g.v[(static_cast<size_t>(y) * ww + xi) * co];
          for (int oc = 0; oc < co; ++oc) gb.v[static_cast<size_t>(oc)] += grow[oc];
        }
    }
    if (!need_x && !need_w) return;

    Tensor gpad = need_x ? Tensor::zeros(padded.shape) : Tensor();
    Tensor* gwp = need_w ? &tape.grad_buf(pwid) : nullptr;
    for (int y = 0; y < h; ++y) {
      for (int xi = 0; xi < ww; ++xi) {
        const double* grow = &g.v[(static_cast<size_t>(y) * ww + xi) * co];
        for (int oc = 0; oc < co; ++oc) {
          const double gval = grow[oc];
          if (gval == 0.0) continue;
          const size_t wb = static_cast<size_t>(oc) * k * k * ci;
          for (int ky = 0; ky < k; ++ky) {
            const size_t prowoff = (static_cast<size_t>(y + ky) * pw + xi) * ci;
            for (int kx = 0; kx < k; ++kx) {
              const size_t tap = static_cast<size_t>(ky) * k * ci + static_cast<size_t>(kx) * ci;
              if (gwp)
                axpy(&gwp->v[wb + tap], &padded.v[prowoff + static_cast<size_t>(kx) * ci], gval, ci);
              if (need_x)
                axpy(&gpad.v[prowoff + static_cast<size_t>(kx) * ci], &wv2.v[wb + tap], gval, ci);
            }
          }
        }
      }
    }
    if (need_x) {
      // fold the padded-buffer gradient back through the mirror map
      Tensor& gx = tape.grad_buf(px);
      for (int y = 0; y < h + 2 * r; ++y) {
        const int sy = reflect_index(y - r, h);
        for (int xi = 0; xi < pw; ++xi) {
          const int sx = reflect_index(xi - r, ww);
          const double* src = &gpad.v[(static_cast<size_t>(y) * pw + xi) * ci];
          double* dst = &gx.v[(static_cast<size_t>(sy) * ww + sx) * ci];
          for (int ch = 0; ch < ci; ++ch) dst[ch] += src[ch];
        }
      }
    }
  });
}

Var prelu(Var x, Var alpha) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  const Tensor& av = t.val(alpha);
  FCVSR_CHECK(xv.rank() == 3 && av.rank() == 1 && av.dim(0) == xv.dim(2),
              "prelu: alpha must be {c}");
  const int c = xv.dim(2);
  Tensor out = xv;
  const size_t n = out.v.size();
  for (size_t i = 0; i < n; ++i) {
    const double e = out.v[i];
    if (e < 0.0) out.v[i] = e * av.v[i % c];
  }
  int px = x.id, pa = alpha.id;
  return t.make(std::move(out), {x, alpha}, [px, pa, c](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& xv2 = tape.val(Var{&tape, px});
    const Tensor& av2 = tape.val(Var{&tape, pa});
    Tensor gx(xv2.shape);
    Tensor ga({c});
    for (size_t i = 0; i < g.v.size(); ++i) {
      const double e = xv2.v[i];
      if (e >= 0.0) {
        gx.v[i] = g.v[i];
      } else {
        gx.v[i] = g.v[i] * av2.v[i % c];
        ga.v[i % c] += g.v[i] * e;
      }
    }
    tape.accum(px, gx);
    tape.accum(pa, ga);
  });
}

Var global_avg_pool(Var x) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  FCVSR_CHECK(xv.rank() == 3, "global_avg_pool expects {h,w,c}");
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  const double inv = 1.0 / (static_cast<double>(h) * w);
  Tensor out({1, 1, c});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch) out.v[static_cast<size_t>(ch)] += xv.at(y, xw, ch);
  for (auto& e : out.v) e *= inv;
  int px = x.id;
  return t.make(std::move(out), {x}, [px, h, w, c, inv](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx({h, w, c});
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        for (int ch = 0; ch < c; ++ch) gx.at(y, xw, ch) = g.v[static_cast<size_t>(ch)] * inv;
    tape.accum(px, gx);
  });
}

Var channel_gate(Var x, Var gate) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  const Tensor& gv = t.val(gate);
  FCVSR_CHECK(gv.rank() == 3 && gv.dim(0) == 1 && gv.dim(1) == 1 && gv.dim(2) == xv.dim(2),
              "channel_gate: gate must be {1,1,c}");
  const int c = xv.dim(2);
  Tensor out = xv;
  for (size_t i = 0; i < out.v.size(); ++i) out.v[i] *= gv.v[i % c];
  int px = x.id, pg = gate.id;
  return t.make(std::move(out), {x, gate}, [px, pg, c](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& xv2 = tape.val(Var{&tape, px});
    const Tensor& gv2 = tape.val(Var{&tape, pg});
    Tensor gx(xv2.shape);
    Tensor gg({1, 1, c});
    for (size_t i = 0; i < g.v.size(); ++i) {
      gx.v[i] = g.v[i] * gv2.v[i % c];
      gg.v[i % c] += g.v[i] * xv2.v[i];
    }
    tape.accum(px, gx);
    tape.accum(pg, gg);
  });
}

Tensor bilinear_resize(const Tensor& x, int oh, int ow) {
  FCVSR_CHECK(x.rank() == 3, "bilinear_resize expects {h,w,c}");
  FCVSR_CHECK(oh >= 1 && ow >= 1, "bilinear_resize: bad target size");
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  Tensor out({oh, ow, c});
  const double ry = static_cast<double>(h) / oh;
  const double rx = static_cast<double>(w) / ow;
  for (int oy = 0; oy < oh; ++oy) {
    const double sy = clampd((oy + 0.5) * ry - 0.5, 0.0, h - 1.0);
    const int y0 = static_cast<int>(sy);
    const int y1 = y0 + 1 < h ? y0 + 1 : h - 1;
    const double fy = sy - y0;
    for (int ox = 0; ox < ow; ++ox) {
      const double sx = clampd((ox + 0.5) * rx - 0.5, 0.0, w - 1.0);
      const int x0 = static_cast<int>(sx);
      const int x1 = x0 + 1 < w ? x0 + 1 : w - 1;
      const double fx = sx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = (1.0 - fx) * x.at(y0, x0, ch) + fx * x.at(y0, x1, ch);
        const double bot = (1.0 - fx) * x.at(y1, x0, ch) + fx * x.at(y1, x1, ch);
        out.at(oy, ox, ch) = (1.0 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

Var bilinear_resize(Var x, int oh, int ow) {
  Tape& t = *x.tape;
  Tensor out = bilinear_resize(t.val(x), oh, ow);
  const int h = t.val(x).dim(0), w = t.val(x).dim(1), c = t.val(x).dim(2);
  int px = x.id;
  return t.make(std::move(out), {x}, [px, h, w, c, oh, ow](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx({h, w, c});
    const double ry = static_cast<double>(h) / oh;
    const double rx = static_cast<double>(w) / ow;
    for (int oy = 0; oy < oh; ++oy) {
      const double sy = clampd((oy + 0.5) * ry - 0.5, 0.0, h - 1.0);
      const int y0 = static_cast<int>(sy);
      const int y1 = y0 + 1 < h ? y0 + 1 : h - 1;
      const double fy = sy - y0;
      for (int ox = 0; ox < ow; ++ox) {
        const double sx = clampd((ox + 0.5) * rx - 0.5, 0.0, w - 1.0);
        const int x0 = static_cast<int>(sx);
        const int x1 = x0 + 1 < w ? x0 + 1 : w - 1;
        const double fx = sx - x0;
        for (int ch = 0; ch < c; ++ch) {
          const double gv = g.at(oy, ox, ch);
          gx.at(y0, x0, ch) += gv * (1.0 - fy) * (1.0 - fx);
          gx.at(y0, x1, ch) += gv * (1.0 - fy) * fx;
          gx.at(y1, x0, ch) += gv * fy * (1.0 - fx);
          gx.at(y1, x1, ch) += gv * fy * fx;
        }
      }
    }
    tape.accum(px, gx);
  });
}

Var pixel_shuffle(Var x, int rr) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  FCVSR_CHECK(xv.rank() == 3 && rr >= 1 && xv.dim(2) % (rr * rr) == 0,
              "pixel_shuffle: channels must divide r^2");
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2) / (rr * rr);
  Tensor out({h * rr, w * rr, c});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch)
        for (int dy = 0; dy < rr; ++dy)
          for (int dx = 0; dx < rr; ++dx)
            out.at(y * rr + dy, xw * rr + dx, ch) = xv.at(y, xw, ch * rr * rr + dy * rr + dx);
  int px = x.id;
  return t.make(std::move(out), {x}, [px, h, w, c, rr](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    Tensor gx({h, w, c * rr * rr});
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        for (int ch = 0; ch < c; ++ch)
          for (int dy = 0; dy < rr; ++dy)
            for (int dx = 0; dx < rr; ++dx)
              gx.at(y, xw, ch * rr * rr + dy * rr + dx) = g.at(y * rr + dy, xw * rr + dx, ch);
    tape.accum(px, gx);
  });
}

Var warp(Var x, Var offset) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  const Tensor& ov = t.val(offset);
  FCVSR_CHECK(xv.rank() == 3, "warp expects {h,w,c}");
  FCVSR_CHECK(ov.rank() == 3 && ov.dim(0) == xv.dim(0) && ov.dim(1) == xv.dim(1) && ov.dim(2) == 2,
              "warp offset must be {h,w,2}");
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  Tensor out({h, w, c});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw) {
      const double sx = clampd(xw + ov.at(y, xw, 0), 0.0, w - 1.0);
      const double sy = clampd(y + ov.at(y, xw, 1), 0.0, h - 1.0);
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = x0 + 1 < w ? x0 + 1 : w - 1;
      const int y1 = y0 + 1 < h ? y0 + 1 : h - 1;
      const double fx = sx - x0, fy = sy - y0;
      for (int ch = 0; ch < c; ++ch) {
        const double top = (1.0 - fx) * xv.at(y0, x0, ch) + fx * xv.at(y0, x1, ch);
        const double bot = (1.0 - fx) * xv.at(y1, x0, ch) + fx * xv.at(y1, x1, ch);
        out.at(y, xw, ch) = (1.0 - fy) * top + fy * bot;
      }
    }
  int px = x.id, po = offset.id;
  return t.make(std::move(out), {x, offset}, [px, po, h, w, c](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& xv2 = tape.val(Var{&tape, px});
    const Tensor& ov2 = tape.val(Var{&tape, po});
    const bool need_x = tape.requires_grad(Var{&tape, px});
    const bool need_o = tape.requires_grad(Var{&tape, po});
    Tensor gx = need_x ? Tensor::zeros(xv2.shape) : Tensor();
    Tensor go = need_o ? Tensor::zeros(ov2.shape) : Tensor();
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw) {
        const double rawx = xw + ov2.at(y, xw, 0);
        const double rawy = y + ov2.at(y, xw, 1);
        const double sx = clampd(rawx, 0.0, w - 1.0);
        const double sy = clampd(rawy, 0.0, h - 1.0);
        const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
        const int x1 = x0 + 1 < w ? x0 + 1 : w - 1;
        const int y1 = y0 + 1 < h ? y0 + 1 : h - 1;
        const double fx = sx - x0, fy = sy - y0;
        const bool in_x = rawx > 0.0 && rawx < w - 1.0;
        const bool in_y = rawy > 0.0 && rawy < h - 1.0;
        double gdx = 0.0, gdy = 0.0;
        for (int ch = 0; ch < c; ++ch) {
          const double gv = g.at(y, xw, ch);
          if (need_x) {
            gx.at(y0, x0, ch) += gv * (1.0 - fy) * (1.0 - fx);
            gx.at(y0, x1, ch) += gv * (1.0 - fy) * fx;
            gx.at(y1, x0, ch) += gv * fy * (1.0 - fx);
            gx.at(y1, x1, ch) += gv * fy * fx;
          }
          if (need_o) {
            const double v00 = xv2.at(y0, x0, ch), v01 = xv2.at(y0, x1, ch);
            const double v10 = xv2.at(y1, x0, ch), v11 = xv2.at(y1, x1, ch);
            if (in_x) gdx += gv * ((1.0 - fy) * (v01 - v00) + fy * (v11 - v10));
            if (in_y) gdy += gv * ((1.0 - fx) * (v10 - v00) + fx * (v11 - v01));
          }
        }
        if (need_o) {
          go.at(y, xw, 0) = gdx;
          go.at(y, xw, 1) = gdy;
        }
      }
    if (need_x) tape.accum(px, gx);
    if (need_o) tape.accum(po, go);
  });
}

Var separable_adaptive_conv(Var x, Var kv, Var kh) {
  Tape& t = *x.tape;
  const Tensor& xv = t.val(x);
  const Tensor& kvv = t.val(kv);
  const Tensor& khv = t.val(kh);
  FCVSR_CHECK(xv.rank() == 3 && kvv.rank() == 4 && khv.rank() == 4,
              "separable_adaptive_conv: x {h,w,c}, kernels {h,w,c,k}");
  const int h = xv.dim(0), w = xv.dim(1), c = xv.dim(2);
  FCVSR_CHECK(kvv.dim(0) == h && kvv.dim(1) == w && kvv.dim(2) == c &&
                  khv.shape == kvv.shape,
              "separable_adaptive_conv: kernel shape mismatch");
  const int k = kvv.dim(3);
  FCVSR_CHECK(k % 2 == 1, "separable_adaptive_conv: kernel size must be odd");
  const int r = k / 2;
  auto kidx = [w, c, k](int y, int xw, int ch, int tap) {
    return ((static_cast<size_t>(y) * w + xw) * c + ch) * k + tap;
  };
  Tensor out({h, w, c});
  for (int y = 0; y < h; ++y)
    for (int xw = 0; xw < w; ++xw)
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) {
          const int sy = reflect_index(y + j - r, h);
          double row = 0.0;
          for (int i = 0; i < k; ++i)
            row += khv.v[kidx(y, xw, ch, i)] * xv.at(sy, reflect_index(xw + i - r, w), ch);
          acc += kvv.v[kidx(y, xw, ch, j)] * row;
        }
        out.at(y, xw, ch) = acc;
      }
  int px = x.id, pv = kv.id, ph = kh.id;
  return t.make(std::move(out), {x, kv, kh}, [px, pv, ph, h, w, c, k, r, kidx](Tape& tape, int id) {
    const Tensor& g = tape.grad(Var{&tape, id});
    const Tensor& xv2 = tape.val(Var{&tape, px});
    const Tensor& kvv2 = tape.val(Var{&tape, pv});
    const Tensor& khv2 = tape.val(Var{&tape, ph});
    const bool need_x = tape.requires_grad(Var{&tape, px});
    const bool need_v = tape.requires_grad(Var{&tape, pv});
    const bool need_h = tape.requires_grad(Var{&tape, ph});
    Tensor gx = need_x ? Tensor::zeros(xv2.shape) : Tensor();
    Tensor gv = need_v ? Tensor::zeros(kvv2.shape) : Tensor();
    Tensor gh = need_h ? Tensor::zeros(khv2.shape) : Tensor();
    for (int y = 0; y < h; ++y)
      for (int xw = 0; xw < w; ++xw)
        for (int ch = 0; ch < c; ++ch) {
          const double gval = g.at(y, xw, ch);
          if (gval == 0.0) continue;
          for (int j = 0; j < k; ++j) {
            const int sy = reflect_index(y + j - r, h);
            const double kvj = kvv2.v[kidx(y, xw, ch, j)];
            double row = 0.0;
            for (int i = 0; i < k; ++i) {
              const int sx = reflect_index(xw + i - r, w);
              const double xval = xv2.at(sy, sx, ch);
              const double khi = khv2.v[kidx(y, xw, ch, i)];
              row += khi * xval;
              if (need_x) gx.at(sy, sx, ch) += gval * kvj * khi;
              if (need_h) gh.v[kidx(y, xw, ch, i)] += gval * kvj * xval;
            }
            if (need_v) gv.v[kidx(y, xw, ch, j)] += gval * row;
          }
        }
    if (need_x) tape.accum(px, gx);
    if (need_v) tape.accum(pv, gv);
    if (need_h) tape.accum(ph, gh);
  });
}

Var conv_layer(ParamContext& ctx, const std::string& name, Var x, int k, int co,
               double weight_scale) {
  const int ci = ctx.tape.val(x).dim(2);
  Var w = ctx.p(name + ".w", {co, k, k, ci}, init_he_uniform(k * k * ci, weight_scale));
  Var b = ctx.p(name + ".b", {co}, init_zeros());
  return conv2d(x, w, b);
}

Var prelu_layer(ParamContext& ctx, const std::string& name, Var x) {
  const int c = ctx.tape.val(x).dim(2);
  Var a = ctx.p(name + ".a", {c}, init_const(0.25));
  return prelu(x, a);
}

Var channel_attention(ParamContext& ctx, const std::string& name, Var x) {
  Var pooled = global_avg_pool(x);
  Var y = conv_layer(ctx, name + ".c0", pooled, 1, ctx.tape.val(x).dim(2));
  y = ops::relu(y);
  y = conv_layer(ctx, name + ".c1", y, 1, ctx.tape.val(x).dim(2));
  y = ops::sigmoid(y);
  return channel_gate(x, y);
}

}  // namespace nn
}  // namespace fcvsr
