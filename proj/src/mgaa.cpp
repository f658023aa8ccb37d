#include "fcvsr/mgaa.hpp"

#include "fcvsr/ops.hpp"

namespace fcvsr::mgaa {

using nn::conv_layer;

std::vector<Var> motion_estimate(ParamContext& ctx, const ModelConfig& cfg,
                                 const std::string& prefix, Var ref, Var src) {
  Tape& t = ctx.tape;
  const Tensor& rv = t.val(ref);
  check_same_shape(rv, t.val(src), "motion_estimate");
  FCVSR_CHECK(cfg.n_offsets >= 1, "motion_estimate: need at least one branch");
  const int h = rv.dim(0), w = rv.dim(1), c = rv.dim(2);

  std::vector<Var> offsets;
  if (cfg.zero_offsets) {
    for (int n = 0; n < cfg.n_offsets; ++n) offsets.push_back(t.constant(Tensor({h, w, 2})));
    return offsets;
  }

  Var fr = ops::fft2_reim(ref);  // {h,w,2c}
  Var fs = ops::fft2_reim(src);
  Var cat = ops::concat_channels({fr, fs});
  Var cb1 = conv_layer(ctx, prefix + "cb1.c0", cat, 3, 4 * c);
  cb1 = ops::relu(cb1);
  cb1 = conv_layer(ctx, prefix + "cb1.c1", cb1, 3, 2 * c);
  Var fd = ops::add(ops::sub(fr, fs), cb1);

  Var mod = conv_layer(ctx, prefix + "cb2.c0", fr, 3, 2 * c);
  mod = ops::relu(mod);
  mod = conv_layer(ctx, prefix + "cb2.c1", mod, 3, 4);

  for (int n = 1; n <= cfg.n_offsets; ++n) {
    const std::string bp = prefix + "branch" + std::to_string(n);
    const int ks = 2 * n + 1;
    Var b = conv_layer(ctx, bp + ".c0", fd, ks, 2 * c);
    // small output head keeps initial offsets near zero
    b = conv_layer(ctx, bp + ".c1", b, ks, 4, 0.1);
    b = nn::prelu_layer(ctx, bp + ".act", b);
    b = nn::channel_attention(ctx, bp + ".ca", b);
    Var spec = ops::mul(b, mod);  // {h,w,4}: [re_x, re_y, im_x, im_y]
    Var zx = ops::ifft2_reim_to_real(
        ops::concat_channels({ops::slice_channels(spec, 0, 1), ops::slice_channels(spec, 2, 1)}));
    Var zy = ops::ifft2_reim_to_real(
        ops::concat_channels({ops::slice_channels(spec, 1, 1), ops::slice_channels(spec, 3, 1)}));
    offsets.push_back(ops::concat_channels({zx, zy}));
  }
  return offsets;
}

KernelSet predict_kernels(ParamContext& ctx, const ModelConfig& cfg,
                          const std::string& prefix, Var ref) {
  Tape& t = ctx.tape;
  const Tensor& rv = t.val(ref);
  const int h = rv.dim(0), w = rv.dim(1), c = rv.dim(2);
  const int k = cfg.k_taps, n = cfg.n_offsets;
  FCVSR_CHECK(k % 2 == 1, "kernel predictor requires odd kernel size");
  FCVSR_CHECK(c == cfg.channels, "predict_kernels: feature channels disagree with config");

  Var f = conv_layer(ctx, prefix + "c0", ref, 3, c);
  const int head = 2 * n * c * k;
  Var wv = ctx.p(prefix + "head.w", {head, 1, 1, c}, init_he_uniform(c, 0.05));
  // bias = center tap of every 1-d kernel: the cascade starts as the identity
  Var bv = ctx.p(prefix + "head.b", {head}, [k](Tensor& tt, Rng&) {
    for (size_t i = 0; i < tt.v.size(); ++i)
      tt.v[i] = (static_cast<int>(i) % k == k / 2) ? 1.0 : 0.0;
  });
  Var vec = nn::conv2d(f, wv, bv);  // {h,w,2nck}

  // per-pixel layout: [stage][vertical | horizontal][channel][tap]
  KernelSet ks;
  for (int s = 0; s < n; ++s) {
    Var kv = ops::slice_channels(vec, s * 2 * c * k, c * k);
    Var kh = ops::slice_channels(vec, s * 2 * c * k + c * k, c * k);
    ks.vertical.push_back(ops::reshape(kv, {h, w, c, k}));
    ks.horizontal.push_back(ops::reshape(kh, {h, w, c, k}));
  }
  return ks;
}

Var mgac_align(Var src, const std::vector<Var>& offsets, const KernelSet& kernels) {
  FCVSR_CHECK(offsets.size() == kernels.vertical.size() &&
                  offsets.size() == kernels.horizontal.size(),
              "mgac_align: offset/kernel counts differ");
  Var a = src;
  for (size_t n = 0; n < offsets.size(); ++n) {
    a = nn::warp(a, offsets[n]);
    a = nn::separable_adaptive_conv(a, kernels.vertical[n], kernels.horizontal[n]);
  }
  return a;
}

Var mgaa_forward(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
                 Var left, Var center, Var right) {
  Tape& t = ctx.tape;
  check_same_shape(t.val(left), t.val(center), "mgaa_forward");
  check_same_shape(t.val(right), t.val(center), "mgaa_forward");

  std::vector<Var> off_f = motion_estimate(ctx, cfg, prefix + "me.", center, left);
  std::vector<Var> off_b = motion_estimate(ctx, cfg, prefix + "me.", center, right);
  KernelSet kernels = predict_kernels(ctx, cfg, prefix + "kp.", center);
  Var af = mgac_align(left, off_f, kernels);
  Var ab = mgac_align(right, off_b, kernels);
  return conv_layer(ctx, prefix + "fuse", ops::concat_channels({af, ab}), 3, cfg.channels);
}

}  // namespace fcvsr::mgaa
