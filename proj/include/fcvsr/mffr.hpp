#pragma once
#include <string>
#include <vector>

#include "fcvsr/config.hpp"
#include "fcvsr/nn.hpp"

namespace fcvsr::mffr {

// Band-split of a feature map under a fixed mask set (differentiable).
std::vector<Var> decompose(Var x, const MaskSet& ms);

// x + gamma * CA(sigmoid(conv3x3(x))); identity when cfg.identity_hooks.
Var enhancement_block(ParamContext& ctx, const ModelConfig& cfg, const std::string& name, Var x);

// Progressive low-to-high enhancement. q is 1-based; S holds bands 1..q,
// E holds the q-1 already-enhanced bands.
Var enhance_subband(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
                    int q, const std::vector<Var>& S, const std::vector<Var>& E);

// Channel-attention fusion of the enhanced bands: CA(sum E_j).
Var aggregate(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
              const std::vector<Var>& E);

Var mffr_forward(ParamContext& ctx, const ModelConfig& cfg, const std::string& prefix,
                 Var x, const MaskSet& ms);

// As mffr_forward but exposing the intermediate band sets (debug dumps).
struct RefineTrace {
  std::vector<Var> bands;     // S_j
  std::vector<Var> enhanced;  // E_j
  Var out;
};
RefineTrace mffr_forward_traced(ParamContext& ctx, const ModelConfig& cfg,
                                const std::string& prefix, Var x, const MaskSet& ms);

}  // namespace fcvsr::mffr
