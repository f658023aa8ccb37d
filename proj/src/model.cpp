#include "fcvsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fcvsr/mffr.hpp"
#include "fcvsr/mgaa.hpp"
#include "fcvsr/ops.hpp"

namespace fcvsr {

void ModelConfig::validate() const {
  FCVSR_CHECK(n_offsets >= 1, "config: N must be >= 1");
  FCVSR_CHECK(q_bands >= 1, "config: Q must be >= 1");
  FCVSR_CHECK(r_groups >= 1, "config: R must be >= 1");
  FCVSR_CHECK(k_taps >= 1 && k_taps % 2 == 1, "config: kernel size k must be odd");
  FCVSR_CHECK(channels >= 1, "config: channels must be >= 1");
  FCVSR_CHECK(img_channels == 1 || img_channels == 3, "config: image channels must be 1 or 3");
  FCVSR_CHECK(scale >= 1, "config: scale must be >= 1");
  FCVSR_CHECK(std::isfinite(gamma), "config: gamma must be finite");
  FCVSR_CHECK(!(no_feedforward && no_feedback),
              "config: cannot drop both enhancement branches");
}

// Presets pin c=56: the published totals are 8.81M / 3.70M and the estimator's
// multi-scale conv branches grow quadratically in c, so c=64 lands well above
// the +25% diagnostic envelope while c=56 sits inside it for both variants.
ModelConfig preset_fcvsr() {
  ModelConfig cfg;
  cfg.n_offsets = 6;
  cfg.q_bands = 8;
  cfg.r_groups = 10;
  cfg.channels = 56;
  return cfg;
}

ModelConfig preset_fcvsr_s() {
  ModelConfig cfg;
  cfg.n_offsets = 4;
  cfg.q_bands = 4;
  cfg.r_groups = 3;
  cfg.channels = 56;
  return cfg;
}

void LossConfig::validate() const {
  FCVSR_CHECK(alpha >= 0.0, "loss config: alpha must be >= 0");
  FCVSR_CHECK(tau > 0.0, "loss config: tau must be > 0");
  FCVSR_CHECK(eps > 0.0, "loss config: eps must be > 0");
}

namespace model {

std::vector<Var> embed_frames(ParamContext& ctx, const ModelConfig& cfg,
                              const std::vector<Var>& frames) {
  FCVSR_CHECK(frames.size() == 7, "embed_frames: expected a 7-frame window");
  std::vector<Var> feats;
  feats.reserve(7);
  for (const Var& f : frames) feats.push_back(nn::conv_layer(ctx, "embed", f, 3, cfg.channels));
  return feats;
}

namespace {

// two-scale conv block: full-res path + half-res path, summed, PReLU, skip.
// Conv weights start damped: the trunk stacks 3R of these behind skip
// connections, and full-gain starts compound into huge activations.
Var scale_conv_block(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix, Var x) {
  Tape& t = ctx.tape;
  const int h = t.val(x).dim(0), w = t.val(x).dim(1);
  Var full = nn::conv_layer(ctx, prefix + "full", x, 3, cfg.channels, 0.1);
  Var half = nn::bilinear_resize(x, (h + 1) / 2, (w + 1) / 2);
  half = nn::conv_layer(ctx, prefix + "half", half, 3, cfg.channels, 0.1);
  half = nn::bilinear_resize(half, h, w);
  Var s = nn::prelu_layer(ctx, prefix + "act", ops::add(full, half));
  return ops::add(x, s);
}

}  // namespace

Var reconstruct(ParamContext& ctx, const ModelConfig& cfg, Var feature) {
  Var x = feature;
  for (int g = 1; g <= cfg.r_groups; ++g) {
    const std::string gp = "rec.g" + std::to_string(g) + ".";
    Var y = x;
    for (int s = 1; s <= 3; ++s) y = scale_conv_block(ctx, cfg, gp + "s" + std::to_string(s) + ".", y);
    x = ops::add(x, y);
  }
  // near-zero start: the first forward passes are dominated by the bilinear
  // skip, so training begins from the upsample instead of conv noise
  Var proj =
      nn::conv_layer(ctx, "rec.out", x, 3, cfg.img_channels * cfg.scale * cfg.scale, 1e-3);
  return nn::pixel_shuffle(proj, cfg.scale);
}

Var aligned_feature(ParamContext& ctx, const ModelConfig& cfg, const std::vector<Var>& frames) {
  cfg.validate();
  FCVSR_CHECK(frames.size() == 7, "forward: expected a 7-frame window");
  Tape& t = ctx.tape;
  const Tensor& f0 = t.val(frames[0]);
  FCVSR_CHECK(f0.rank() == 3 && f0.dim(2) == cfg.img_channels,
              "forward: frames must be {h,w,c_img}");
  for (const Var& f : frames) check_same_shape(t.val(f), f0, "forward");

  std::vector<Var> feats = embed_frames(ctx, cfg, frames);

  if (cfg.no_alignment)
    return nn::conv_layer(ctx, "align.cat", ops::concat_channels(feats), 3, cfg.channels);

  const bool sh = cfg.share_alignment;
  const std::string p0 = sh ? "align." : "align.s0.";
  const std::string p1 = sh ? "align." : "align.s1.";
  const std::string p2 = sh ? "align." : "align.s2.";
  Var prev = mgaa::mgaa_forward(ctx, cfg, p0, feats[0], feats[1], feats[2]);
  Var next = mgaa::mgaa_forward(ctx, cfg, p1, feats[4], feats[5], feats[6]);
  return mgaa::mgaa_forward(ctx, cfg, p2, prev, feats[3], next);
}

Var forward(ParamContext& ctx, const ModelConfig& cfg, const std::vector<Var>& frames) {
  Tape& t = ctx.tape;
  Var aligned = aligned_feature(ctx, cfg, frames);
  const int h = t.val(frames[3]).dim(0), w = t.val(frames[3]).dim(1);

  Var refined = aligned;
  if (!cfg.no_refinement) {
    MaskSet ms = make_mask_set(h, w, cfg.q_bands, cfg.mask_variant);
    refined = mffr::mffr_forward(ctx, cfg, "mffr.", aligned, ms);
  }

  Var residual = reconstruct(ctx, cfg, refined);
  Var up = nn::bilinear_resize(frames[3], h * cfg.scale, w * cfg.scale);
  return ops::add(residual, up);
}

Var forward(ParamContext& ctx, const ModelConfig& cfg, const std::vector<Tensor>& frames) {
  std::vector<Var> vars;
  vars.reserve(frames.size());
  for (const Tensor& f : frames) vars.push_back(ctx.tape.constant(f));
  return forward(ctx, cfg, vars);
}

Tensor infer(ParamStore& store, const ModelConfig& cfg, const std::vector<Tensor>& frames) {
  Tape tape;
  NoGrad ng(tape);
  ParamContext ctx{tape, store, true};
  Var sr = forward(ctx, cfg, frames);
  Tensor out = tape.val(sr);
  for (auto& e : out.v) e = clampd(e, 0.0, 1.0);
  return out;
}

void materialize(ParamStore& store, const ModelConfig& cfg) {
  Tape tape;
  NoGrad ng(tape);
  ParamContext ctx{tape, store, true};
  std::vector<Tensor> frames(7, Tensor({8, 8, cfg.img_channels}));
  forward(ctx, cfg, frames);
}

int64_t param_count(const ModelConfig& cfg) {
  ParamStore store(0);
  materialize(store, cfg);
  return store.total_params();
}

std::vector<std::pair<std::string, int64_t>> param_count_by_module(const ModelConfig& cfg) {
  ParamStore store(0);
  materialize(store, cfg);
  std::map<std::string, int64_t> acc;
  for (const auto& name : store.names()) {
    const auto dot = name.find('.');
    acc[name.substr(0, dot)] += store.at(name).numel();
  }
  return {acc.begin(), acc.end()};
}

}  // namespace model
}  // namespace fcvsr
