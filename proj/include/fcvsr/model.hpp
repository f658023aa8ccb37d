#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "fcvsr/config.hpp"
#include "fcvsr/nn.hpp"

namespace fcvsr::model {

// Shared-weight per-frame embedding conv (c_img -> c).
std::vector<Var> embed_frames(ParamContext& ctx, const ModelConfig& cfg,
                              const std::vector<Var>& frames);

// Residual reconstruction head: R residual groups of 3 two-scale conv blocks,
// projection conv, pixel shuffle. Output {h*scale, w*scale, c_img}.
Var reconstruct(ParamContext& ctx, const ModelConfig& cfg, Var feature);

// Embedding + temporal alignment tree; the feature the refinement stage sees.
Var aligned_feature(ParamContext& ctx, const ModelConfig& cfg, const std::vector<Var>& frames);

// Full forward on a 7-frame window (vars allow gradient checks w.r.t. inputs).
// Output = residual + bilinear upsample of the center frame, unclamped.
Var forward(ParamContext& ctx, const ModelConfig& cfg, const std::vector<Var>& frames);

// Convenience for training: frames as plain tensors (treated as constants).
Var forward(ParamContext& ctx, const ModelConfig& cfg, const std::vector<Tensor>& frames);

// Inference: no tape growth beyond values, output clamped to [0,1].
Tensor infer(ParamStore& store, const ModelConfig& cfg, const std::vector<Tensor>& frames);

// Create every parameter of the model in the store (cheap dry run).
void materialize(ParamStore& store, const ModelConfig& cfg);

int64_t param_count(const ModelConfig& cfg);

// Learnable-parameter totals grouped by top-level module prefix, for the
// configuration report.
std::vector<std::pair<std::string, int64_t>> param_count_by_module(const ModelConfig& cfg);

}  // namespace fcvsr::model
