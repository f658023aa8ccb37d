#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fcvsr/checkpoint.hpp"
#include "fcvsr/config.hpp"
#include "fcvsr/data.hpp"
#include "fcvsr/image_io.hpp"
#include "fcvsr/model.hpp"
#include "fcvsr/train.hpp"

using nlohmann::json;
using namespace fcvsr;

namespace {

struct Options {
  std::string preset = "fcvsr";
  std::string config_path;
  std::string manifest_path;
  uint64_t seed = 0;
  std::string variant;
  std::string encoder_cmd;
  std::string vmaf_cmd;
  std::string out;
  std::string ckpt;
  std::string resume;
  std::string frames_dir;
  std::string src_dir;
  // prepare-data
  int scale = 4;
  std::string mode = "none";
  int value = 0;
  int channels = 3;
};

ModelConfig preset_by_name(const std::string& name) {
  if (name == "fcvsr") return preset_fcvsr();
  if (name == "fcvsr-s") return preset_fcvsr_s();
  if (name == "custom") return ModelConfig{};
  fail("unknown preset '" + name + "' (expected fcvsr, fcvsr-s or custom)");
  return {};
}

void apply_config_file(const std::string& path, ModelConfig& mc, LossConfig& lc,
                       train::TrainConfig& tc) {
  std::ifstream in(path);
  FCVSR_CHECK(in.good(), "cannot open config file " + path);
  json j = json::parse(in);

  if (j.count("model")) {
    const json& m = j["model"];
    mc.n_offsets = m.value("N", mc.n_offsets);
    mc.q_bands = m.value("Q", mc.q_bands);
    mc.r_groups = m.value("R", mc.r_groups);
    mc.k_taps = m.value("k", mc.k_taps);
    mc.channels = m.value("c", mc.channels);
    mc.img_channels = m.value("c_img", mc.img_channels);
    mc.scale = m.value("scale", mc.scale);
    mc.gamma = m.value("gamma", mc.gamma);
    if (m.count("mask_variant"))
      mc.mask_variant = mask_variant_from_string(m["mask_variant"].get<std::string>());
    mc.share_alignment = m.value("share_alignment", mc.share_alignment);
  }
  if (j.count("loss")) {
    const json& l = j["loss"];
    lc.alpha = l.value("alpha", lc.alpha);
    lc.tau = l.value("tau", lc.tau);
    lc.eps = l.value("eps", lc.eps);
  }
  if (j.count("train")) {
    const json& t = j["train"];
    tc.batch = t.value("batch", tc.batch);
    tc.lr0 = t.value("lr", tc.lr0);
    if (t.count("boundaries")) tc.boundaries = t["boundaries"].get<std::vector<int64_t>>();
    tc.total_steps = t.value("total_steps", tc.total_steps);
    tc.hr_patch = t.value("hr_patch", tc.hr_patch);
    tc.log_every = t.value("log_every", tc.log_every);
    tc.ckpt_every = t.value("ckpt_every", tc.ckpt_every);
    tc.rescale_schedule = t.value("rescale_schedule", tc.rescale_schedule);
    tc.schedule_reference = t.value("schedule_reference", tc.schedule_reference);
  }
}

int run_prepare(const Options& o) {
  FCVSR_CHECK(!o.src_dir.empty(), "prepare-data: --src is required");
  FCVSR_CHECK(!o.out.empty(), "prepare-data: --out is required");
  data::DatasetManifest m = data::prepare_dataset(o.src_dir, o.out, o.scale, o.mode, o.value,
                                                  o.encoder_cmd, o.channels);
  int failed = 0;
  for (const auto& s : m.sequences) failed += s.failed ? 1 : 0;
  std::printf("prepared %zu sequences (%d failed) -> %s/manifest.jsonl\n", m.sequences.size(),
              failed, o.out.c_str());
  return failed == 0 ? 0 : 1;
}

int run_train(const Options& o, bool require_variant) {
  FCVSR_CHECK(!o.manifest_path.empty(), "train: --manifest is required");
  FCVSR_CHECK(!o.out.empty(), "train: --out is required");
  FCVSR_CHECK(!require_variant || !o.variant.empty(), "ablate: --variant is required");

  ModelConfig mc = preset_by_name(o.preset);
  LossConfig lc;
  train::TrainConfig tc;
  if (!o.config_path.empty()) apply_config_file(o.config_path, mc, lc, tc);
  train::apply_variant(o.variant, mc, lc);
  tc.seed = o.seed;
  tc.variant = o.variant;

  data::Dataset ds(data::read_manifest(o.manifest_path));
  train::train_loop(o.out, ds, mc, lc, tc, o.resume);
  std::printf("trained %lld steps -> %s/final\n", static_cast<long long>(tc.total_steps),
              o.out.c_str());
  return 0;
}

int run_eval(const Options& o) {
  FCVSR_CHECK(!o.ckpt.empty(), "eval: --ckpt is required");
  FCVSR_CHECK(!o.manifest_path.empty(), "eval: --manifest is required");
  const std::string report = o.out.empty() ? o.ckpt + "/report.jsonl" : o.out;

  checkpoint::Snapshot snap = checkpoint::read_snapshot(o.ckpt);
  ParamStore store(snap.seed);
  model::materialize(store, snap.model);
  checkpoint::load(o.ckpt, store, nullptr);

  data::Dataset ds(data::read_manifest(o.manifest_path));
  train::EvalSummary s = train::evaluate_model(store, snap.model, ds, report, o.vmaf_cmd);
  std::printf("%lld frames: PSNR %.4f dB, SSIM %.6f -> %s\n",
              static_cast<long long>(s.frames), s.psnr, s.ssim, report.c_str());
  return 0;
}

int run_infer(const Options& o) {
  FCVSR_CHECK(!o.ckpt.empty(), "infer: --ckpt is required");
  FCVSR_CHECK(!o.frames_dir.empty(), "infer: --frames is required");
  FCVSR_CHECK(!o.out.empty(), "infer: --out is required");

  checkpoint::Snapshot snap = checkpoint::read_snapshot(o.ckpt);
  ParamStore store(snap.seed);
  model::materialize(store, snap.model);
  checkpoint::load(o.ckpt, store, nullptr);
  train::infer_dir(store, snap.model, o.frames_dir, o.out);
  std::printf("wrote SR frames to %s\n", o.out.c_str());
  return 0;
}

int run_dump_bands(const Options& o) {
  FCVSR_CHECK(!o.ckpt.empty(), "dump-bands: --ckpt is required");
  FCVSR_CHECK(!o.frames_dir.empty(), "dump-bands: --frames is required");
  FCVSR_CHECK(!o.out.empty(), "dump-bands: --out is required");

  checkpoint::Snapshot snap = checkpoint::read_snapshot(o.ckpt);
  ParamStore store(snap.seed);
  model::materialize(store, snap.model);
  checkpoint::load(o.ckpt, store, nullptr);

  std::vector<Tensor> frames;
  {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(o.frames_dir))
      if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    FCVSR_CHECK(!files.empty(), "dump-bands: no frames in " + o.frames_dir);
    const int n = static_cast<int>(files.size());
    const auto win = data::sample_window(n, n / 2);
    for (int i : win) {
      Tensor img = image_io::read_png(files[static_cast<size_t>(i)].string());
      if (snap.model.img_channels == 1 && img.dim(2) == 3) img = data::to_luma(img);
      frames.push_back(std::move(img));
    }
  }
  train::dump_subbands(store, snap.model, frames, o.out);
  std::printf("wrote band dumps to %s\n", o.out.c_str());
  return 0;
}

int run_param_count(const Options& o) {
  ModelConfig mc = preset_by_name(o.preset);
  LossConfig lc;
  train::TrainConfig tc;
  if (!o.config_path.empty()) apply_config_file(o.config_path, mc, lc, tc);
  train::apply_variant(o.variant, mc, lc);

  std::printf("config: N=%d Q=%d R=%d k=%d c=%d c_img=%d scale=%d\n", mc.n_offsets, mc.q_bands,
              mc.r_groups, mc.k_taps, mc.channels, mc.img_channels, mc.scale);
  for (const auto& [module, count] : model::param_count_by_module(mc))
    std::printf("  %-8s %12lld\n", module.c_str(), static_cast<long long>(count));
  const int64_t total = model::param_count(mc);
  std::printf("  %-8s %12lld\n", "total", static_cast<long long>(total));

  const double target =
      o.preset == "fcvsr" ? 8.81e6 : (o.preset == "fcvsr-s" ? 3.70e6 : 0.0);
  if (target > 0.0)
    std::printf("reference total %.2fM, deviation %+.1f%%\n", target / 1e6,
                100.0 * (static_cast<double>(total) - target) / target);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compressed-video super-resolution trainer"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--preset", o.preset, "fcvsr | fcvsr-s | custom");
    c->add_option("--config", o.config_path, "JSON config file");
    c->add_option("--seed", o.seed, "RNG seed");
    c->add_option("--variant", o.variant, "graph/loss variant tag");
  };

  CLI::App* prep = app.add_subcommand("prepare-data", "downsample + encode a frame corpus");
  prep->add_option("--src", o.src_dir, "directory of per-sequence frame directories")->required();
  prep->add_option("--out", o.out, "output dataset directory")->required();
  prep->add_option("--scale", o.scale, "downsampling factor");
  prep->add_option("--mode", o.mode, "none | QP | CRF");
  prep->add_option("--value", o.value, "QP or CRF value");
  prep->add_option("--encoder-cmd", o.encoder_cmd,
                   "encoder template with {input} {output} {qp} {crf}");
  prep->add_option("--channels", o.channels, "1 (luma) or 3 (RGB)");

  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  add_common(train_cmd);
  train_cmd->add_option("--manifest", o.manifest_path, "dataset manifest")->required();
  train_cmd->add_option("--out", o.out, "run directory (logs + checkpoints)")->required();
  train_cmd->add_option("--resume", o.resume, "checkpoint directory to resume from");

  CLI::App* ablate = app.add_subcommand("ablate", "train a modified graph");
  add_common(ablate);
  ablate->add_option("--manifest", o.manifest_path, "dataset manifest")->required();
  ablate->add_option("--out", o.out, "run directory")->required();
  ablate->add_option("--resume", o.resume, "checkpoint directory to resume from");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  eval_cmd->add_option("--ckpt", o.ckpt, "checkpoint directory")->required();
  eval_cmd->add_option("--manifest", o.manifest_path, "dataset manifest")->required();
  eval_cmd->add_option("--out", o.out, "report path (.jsonl)");
  eval_cmd->add_option("--vmaf-cmd", o.vmaf_cmd, "external scorer with {ref} {dist}");

  CLI::App* infer_cmd = app.add_subcommand("infer", "super-resolve a frame directory");
  infer_cmd->add_option("--ckpt", o.ckpt, "checkpoint directory")->required();
  infer_cmd->add_option("--frames", o.frames_dir, "LR frame directory")->required();
  infer_cmd->add_option("--out", o.out, "output frame directory")->required();

  CLI::App* dump = app.add_subcommand("dump-bands", "write per-band feature images");
  dump->add_option("--ckpt", o.ckpt, "checkpoint directory")->required();
  dump->add_option("--frames", o.frames_dir, "LR frame directory")->required();
  dump->add_option("--out", o.out, "output directory")->required();

  CLI::App* pc = app.add_subcommand("param-count", "report learnable-parameter totals");
  add_common(pc);

  CLI11_PARSE(app, argc, argv);

  try {
    if (prep->parsed()) return run_prepare(o);
    if (train_cmd->parsed()) return run_train(o, false);
    if (ablate->parsed()) return run_train(o, true);
    if (eval_cmd->parsed()) return run_eval(o);
    if (infer_cmd->parsed()) return run_infer(o);
    if (dump->parsed()) return run_dump_bands(o);
    if (pc->parsed()) return run_param_count(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
