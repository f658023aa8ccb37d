#include "fcvsr/losses.hpp"

#include "fcvsr/ops.hpp"

namespace fcvsr::losses {

Var charbonnier(Var pred, Var target, double eps) {
  Var d = ops::sub(pred, target);
  Var q = ops::add_scalar(ops::mul(d, d), eps * eps);
  return ops::mean_all(ops::sqrt_v(q));
}

namespace {

// negated mean absolute difference, so larger = more similar
Var similarity(Var a, Var b) { return ops::neg(ops::mean_all(ops::abs_v(ops::sub(a, b)))); }

// InfoNCE-style term: -log( exp(s_p/tau) / sum_j exp(s_j/tau) ) with the
// positive included in the denominator.
Var contrast_term(Var s_pos, const std::vector<Var>& s_neg, double tau) {
  std::vector<Var> all;
  all.reserve(s_neg.size() + 1);
  all.push_back(ops::scale(s_pos, 1.0 / tau));
  for (Var s : s_neg) all.push_back(ops::scale(s, 1.0 / tau));
  Var lse = ops::logsumexp(ops::stack_scalars(all));
  return ops::sub(lse, ops::scale(s_pos, 1.0 / tau));
}

}  // namespace

Var frequency_contrast(Var sr, Var hr, Var up, const LossConfig& cfg) {
  Tape& t = *sr.tape;
  const Tensor& x = t.val(sr);
  const int c = x.dim(2);

  Var srw = ops::dwt2_haar(sr);
  Var hrw = ops::dwt2_haar(hr);
  Var upw = ops::dwt2_haar(up);
  auto band = [&](Var w, int b) { return ops::slice_channels(w, b * c, c); };

  // the upsample's detail bands are the shared negatives for every term
  std::vector<Var> negs;
  for (int b = 1; b < 4; ++b) negs.push_back(similarity(band(srw, b), band(upw, b)));

  std::vector<Var> terms;
  if (!cfg.drop_detail_term) {
    for (int b = 1; b < 4; ++b)
      terms.push_back(contrast_term(similarity(band(srw, b), band(hrw, b)), negs, cfg.tau));
  }
  if (!cfg.drop_base_term) {
    terms.push_back(contrast_term(similarity(band(srw, 0), band(hrw, 0)), negs, cfg.tau));
    terms.push_back(contrast_term(similarity(band(srw, 0), band(upw, 0)), negs, cfg.tau));
  }
  FCVSR_CHECK(!terms.empty(), "frequency_contrast: all terms dropped");

  Var total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) total = ops::add(total, terms[i]);
  return total;
}

LossParts total_loss(Var sr, Var hr, Var up, const LossConfig& cfg) {
  cfg.validate();
  Tape& t = *sr.tape;
  Var spatial = charbonnier(sr, hr, cfg.eps);
  if (cfg.alpha == 0.0) {
    Var zero = t.constant(ops::scalar(0.0));
    return {spatial, spatial, zero};
  }
  Var fc = frequency_contrast(sr, hr, up, cfg);
  Var total = ops::add(spatial, ops::scale(fc, cfg.alpha));
  return {total, spatial, fc};
}

}  // namespace fcvsr::losses
