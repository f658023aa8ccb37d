#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcvsr/checkpoint.hpp"
#include "fcvsr/config.hpp"
#include "fcvsr/data.hpp"

namespace fcvsr::train {

struct TrainConfig {
  int batch = 8;
  double lr0 = 2e-4;
  std::vector<int64_t> boundaries = {2000, 8000, 12000};  // lr halves at each
  int64_t total_steps = 30000;
  int hr_patch = 128;
  uint64_t seed = 0;
  int64_t log_every = 10;
  int64_t ckpt_every = 1000;
  std::string variant;            // recorded in checkpoints, not interpreted here
  bool rescale_schedule = false;  // stretch boundaries by total_steps/reference
  int64_t schedule_reference = 30000;

  void validate() const;
};

// Step-decay learning rate, steps counted from 1; a boundary takes effect at
// its own step.
double lr_at(const TrainConfig& cfg, int64_t step);

// Apply an ablation tag ("no-mffr", "mask-variant:ideal", "Q-sweep:4", ...)
// to the configs. Empty string is a no-op; unknown tags throw.
void apply_variant(const std::string& variant, ModelConfig& mc, LossConfig& lc);

// One Adam update over every parameter in creation order. Gradients, moments
// and updated values pass through f32 so a reloaded checkpoint continues
// bit-identically.
void adam_step(ParamStore& store, const std::vector<std::pair<std::string, Tensor>>& grads,
               checkpoint::OptimState& opt, double lr);

// Full loop: batches from the dataset, Adam with the step-decay schedule,
// JSONL log rows {step, lr, L_spa, L_fc, L_all}, periodic ckpt-<step>
// checkpoints plus `final`. Resumes from `resume_dir` when given. Throws on
// non-finite loss after dumping a diagnostic file.
void train_loop(const std::string& out_dir, data::Dataset& ds, const ModelConfig& mc,
                const LossConfig& lc, const TrainConfig& tc, const std::string& resume_dir = "");

struct EvalSummary {
  double psnr = 0.0;
  double ssim = 0.0;
  int64_t frames = 0;
};

// Per-frame metric rows ({sequence, frame, psnr, ssim} JSONL) at report_path,
// per-sequence and overall means beside it (.summary.json). A non-empty
// vmaf_cmd scores each sequence's dumped SR frames against its reference
// directory. Returns the overall means.
EvalSummary evaluate_model(ParamStore& store, const ModelConfig& cfg, data::Dataset& ds,
                           const std::string& report_path, const std::string& vmaf_cmd = "");

// Sliding 7-frame windows over the PNGs of frames_dir; one SR frame written to
// out_dir per input frame.
void infer_dir(ParamStore& store, const ModelConfig& cfg, const std::string& frames_dir,
               const std::string& out_dir);

// Channel-band dump for one window: per-band min-max normalized grayscale
// images of the refinement's inputs and outputs.
void dump_subbands(ParamStore& store, const ModelConfig& cfg, const std::vector<Tensor>& frames,
                   const std::string& out_dir);

}  // namespace fcvsr::train
