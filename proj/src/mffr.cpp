#include "fcvsr/mffr.hpp"

#include "fcvsr/ops.hpp"

namespace fcvsr::mffr {

std::vector<Var> decompose(Var x, const MaskSet& ms) {
  std::vector<Var> bands;
  bands.reserve(ms.masks.size());
  for (const auto& m : ms.masks) bands.push_back(ops::band_filter(x, m));
  return bands;
}

Var enhancement_block(ParamContext& ctx, const ModelConfig& cfg, const std::string& name, Var x) {
  if (cfg.identity_hooks) return x;
  Var y = nn::conv_layer(ctx, name + ".conv", x, 3, ctx.tape.val(x).dim(2));
  y = ops::sigmoid(y);
  y = nn::channel_attention(ctx, name + ".ca", y);
  return ops::add(x, ops::scale(y, cfg.gamma));
}

namespace {

Var sum_list(const std::vector<Var>& xs, int n) {
  Var acc = xs[0];
  for (int i = 1; i < n; ++i) acc = ops::add(acc, xs[static_cast<size_t>(i)]);
  return acc;
}

}  // namespace

Var enhance_subband(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
                    int q, const std::vector<Var>& S, const std::vector<Var>& E) {
  FCVSR_CHECK(q >= 1 && static_cast<int>(S.size()) >= q, "enhance_subband: band list too short");
  FCVSR_CHECK(static_cast<int>(E.size()) == q - 1,
              "enhance_subband: need exactly q-1 enhanced bands");
  const std::string bp = prefix + "q" + std::to_string(q);
  if (q == 1) {
    // lowest band: smooth, then one enhancement block (no feedback exists yet)
    return enhancement_block(ctx, cfg, bp, ops::mean_filter(S[0], 3));
  }
  Var s_low = sum_list(S, q - 1);
  Var s_fwd = ops::sub(S[static_cast<size_t>(q - 1)], s_low);  // high-frequency residual
  Var s_back = sum_list(E, q - 1);
  if (cfg.no_feedforward)
    return ops::add(enhancement_block(ctx, cfg, bp + ".bwd", s_back),
                    S[static_cast<size_t>(q - 1)]);
  Var e_fwd = enhancement_block(ctx, cfg, bp + ".fwd", ops::add(s_fwd, s_back));
  if (cfg.no_feedback) return e_fwd;
  Var e_back = enhancement_block(ctx, cfg, bp + ".bwd", s_back);
  return ops::add(e_fwd, e_back);
}

Var aggregate(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
              const std::vector<Var>& E) {
  FCVSR_CHECK(!E.empty(), "aggregate: empty band set");
  Var s = sum_list(E, static_cast<int>(E.size()));
  if (cfg.identity_hooks) return s;
  return nn::channel_attention(ctx, prefix + "agg", s);
}

Var mffr_forward(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
                 Var x, const MaskSet& ms) {
  return mffr_forward_traced(ctx, cfg, prefix, x, ms).out;
}

RefineTrace mffr_forward_traced(ParamContext& ctx, const ModelConfig& cfg,
                                const std::string& prefix, Var x, const MaskSet& ms) {
  RefineTrace tr;
  tr.bands = decompose(x, ms);
  for (int q = 1; q <= static_cast<int>(tr.bands.size()); ++q)
    tr.enhanced.push_back(enhance_subband(ctx, cfg, prefix, q, tr.bands, tr.enhanced));
  tr.out = aggregate(ctx, cfg, prefix, tr.enhanced);
  return tr;
}

}  // namespace fcvsr::mffr
