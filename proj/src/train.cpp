#include "fcvsr/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fcvsr/image_io.hpp"
#include "fcvsr/losses.hpp"
#include "fcvsr/metrics.hpp"
#include "fcvsr/mffr.hpp"
#include "fcvsr/model.hpp"
#include "fcvsr/ops.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fcvsr::train {

void TrainConfig::validate() const {
  FCVSR_CHECK(batch >= 1, "train config: batch must be >= 1");
  FCVSR_CHECK(lr0 > 0.0 && std::isfinite(lr0), "train config: bad learning rate");
  FCVSR_CHECK(total_steps >= 1, "train config: total_steps must be >= 1");
  FCVSR_CHECK(hr_patch >= 1, "train config: hr_patch must be >= 1");
  FCVSR_CHECK(log_every >= 1, "train config: log_every must be >= 1");
  FCVSR_CHECK(ckpt_every >= 0, "train config: ckpt_every must be >= 0");
  FCVSR_CHECK(schedule_reference >= 1, "train config: schedule_reference must be >= 1");
  for (size_t i = 0; i < boundaries.size(); ++i) {
    FCVSR_CHECK(boundaries[i] >= 1, "train config: schedule boundaries must be >= 1");
    FCVSR_CHECK(i == 0 || boundaries[i] > boundaries[i - 1],
                "train config: schedule boundaries must be strictly increasing");
  }
}

double lr_at(const TrainConfig& cfg, int64_t step) {
  int halvings = 0;
  for (int64_t b : cfg.boundaries) {
    if (cfg.rescale_schedule)
      b = std::llround(static_cast<double>(b) * static_cast<double>(cfg.total_steps) /
                       static_cast<double>(cfg.schedule_reference));
    if (b >= 1 && b <= step) ++halvings;
  }
  return cfg.lr0 / static_cast<double>(int64_t{1} << halvings);
}

void apply_variant(const std::string& variant, ModelConfig& mc, LossConfig& lc) {
  if (variant.empty()) return;
  const auto colon = variant.find(':');
  const std::string head = colon == std::string::npos ? variant : variant.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : variant.substr(colon + 1);

  if (head == "no-mgaa") {
    mc.no_alignment = true;
  } else if (head == "no-me") {
    mc.zero_offsets = true;
  } else if (head == "no-mffr") {
    mc.no_refinement = true;
  } else if (head == "no-fbe") {
    mc.no_feedback = true;
  } else if (head == "no-ffe") {
    mc.no_feedforward = true;
  } else if (head == "no-fc-loss") {
    lc.alpha = 0.0;
  } else if (head == "no-L1-term" || head == "no-l1-term") {
    lc.drop_detail_term = true;
  } else if (head == "no-L2-term" || head == "no-l2-term") {
    lc.drop_base_term = true;
  } else if (head == "mask-variant") {
    FCVSR_CHECK(!arg.empty(), "variant mask-variant needs a filter name, e.g. mask-variant:ideal");
    mc.mask_variant = mask_variant_from_string(arg);
  } else if (head == "Q-sweep" || head == "q-sweep") {
    FCVSR_CHECK(!arg.empty(), "variant Q-sweep needs a band count, e.g. Q-sweep:4");
    mc.q_bands = std::stoi(arg);
  } else if (head == "alpha-sweep") {
    FCVSR_CHECK(!arg.empty(), "variant alpha-sweep needs a weight, e.g. alpha-sweep:0.5");
    lc.alpha = std::stod(arg);
  } else {
    fail("unknown variant '" + variant + "'");
  }
}

void adam_step(ParamStore& store, const std::vector<std::pair<std::string, Tensor>>& grads,
               checkpoint::OptimState& opt, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  opt.t += 1;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(opt.t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(opt.t));
  for (const auto& [name, grad] : grads) {
    Tensor& p = store.at(name);
    Tensor& m = opt.m.at(name);
    Tensor& v = opt.v.at(name);
    check_same_shape(p, grad, "adam_step");
    for (int64_t i = 0; i < p.numel(); ++i) {
      const double g = static_cast<float>(grad.v[i]);
      m.v[i] = b1 * m.v[i] + (1.0 - b1) * g;
      v.v[i] = b2 * v.v[i] + (1.0 - b2) * g * g;
    }
    round_f32(m);
    round_f32(v);
    for (int64_t i = 0; i < p.numel(); ++i)
      p.v[i] -= lr * (m.v[i] / bc1) / (std::sqrt(v.v[i] / bc2) + eps);
    round_f32(p);
  }
}

namespace {

std::string step_dir(int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt-%06lld", static_cast<long long>(step));
  return buf;
}

}  // namespace

void train_loop(const std::string& out_dir, data::Dataset& ds, const ModelConfig& mc,
                const LossConfig& lc, const TrainConfig& tc, const std::string& resume_dir) {
  mc.validate();
  lc.validate();
  tc.validate();
  FCVSR_CHECK(tc.hr_patch % mc.scale == 0, "train: hr_patch must be divisible by scale");

  ParamStore store(tc.seed);
  model::materialize(store, mc);
  checkpoint::OptimState opt;
  for (const auto& name : store.names()) {
    opt.m[name] = Tensor(store.at(name).shape);
    opt.v[name] = Tensor(store.at(name).shape);
  }

  int64_t start = 0;
  if (!resume_dir.empty()) {
    checkpoint::Snapshot snap = checkpoint::load(resume_dir, store, &opt);
    start = snap.step;
    FCVSR_CHECK(start < tc.total_steps, "train: checkpoint already at or past total_steps");
  }

  fs::create_directories(out_dir);
  std::ofstream log(fs::path(out_dir) / "train.jsonl", std::ios::app);
  FCVSR_CHECK(log.good(), "train: cannot open log in " + out_dir);

  checkpoint::Snapshot snap;
  snap.model = mc;
  snap.loss = lc;
  snap.seed = tc.seed;
  snap.variant = tc.variant;

  for (int64_t step = start + 1; step <= tc.total_steps; ++step) {
    const double lr = lr_at(tc, step);

    Tape tape;
    ParamContext ctx{tape, store, false};
    Var total_sum;
    double spa_sum = 0.0, fc_sum = 0.0;
    for (int idx = 0; idx < tc.batch; ++idx) {
      data::TrainSample s = ds.sample(tc.seed, step, idx, tc.hr_patch, mc.scale);
      FCVSR_CHECK(s.lr[0].dim(2) == mc.img_channels,
                  "train: dataset channel count does not match the model");
      std::vector<Var> frames;
      frames.reserve(7);
      for (const Tensor& f : s.lr) frames.push_back(tape.constant(f));
      Var sr = model::forward(ctx, mc, frames);
      losses::LossParts parts =
          losses::total_loss(sr, tape.constant(s.hr), tape.constant(s.up), lc);
      total_sum = idx == 0 ? parts.total : ops::add(total_sum, parts.total);
      spa_sum += tape.val(parts.spatial).v[0];
      fc_sum += tape.val(parts.contrast).v[0];
    }
    Var mean = ops::scale(total_sum, 1.0 / tc.batch);
    const double l_all = tape.val(mean).v[0];
    const double l_spa = spa_sum / tc.batch;
    const double l_fc = fc_sum / tc.batch;

    if (!std::isfinite(l_all)) {
      json diag{{"step", step}, {"lr", lr}, {"L_spa", l_spa}, {"L_fc", l_fc}, {"L_all", l_all}};
      std::ofstream df(fs::path(out_dir) / "nonfinite.json", std::ios::trunc);
      df << diag.dump(2) << "\n";
      throw std::runtime_error("non-finite loss at step " + std::to_string(step) +
                               " (diagnostic written to " + out_dir + "/nonfinite.json)");
    }

    tape.backward(mean);

    std::vector<std::pair<std::string, Tensor>> grads;
    grads.reserve(store.names().size());
    for (const auto& name : store.names()) {
      auto it = ctx.cache.find(name);
      if (it != ctx.cache.end() && tape.has_grad(it->second.id))
        grads.emplace_back(name, tape.grad(it->second));
      else
        grads.emplace_back(name, Tensor(store.at(name).shape));
    }
    adam_step(store, grads, opt, lr);

    if (step % tc.log_every == 0 || step == tc.total_steps) {
      json row{{"step", step}, {"lr", lr}, {"L_spa", l_spa}, {"L_fc", l_fc}, {"L_all", l_all}};
      log << row.dump() << "\n";
      log.flush();
    }
    if (tc.ckpt_every > 0 && step % tc.ckpt_every == 0 && step != tc.total_steps) {
      snap.step = step;
      checkpoint::save((fs::path(out_dir) / step_dir(step)).string(), store, snap, &opt);
    }
  }

  snap.step = tc.total_steps;
  checkpoint::save((fs::path(out_dir) / "final").string(), store, snap, &opt);
}

namespace {

std::string summary_path_for(const std::string& report_path) {
  const std::string suffix = ".jsonl";
  if (report_path.size() > suffix.size() &&
      report_path.compare(report_path.size() - suffix.size(), suffix.size(), suffix) == 0)
    return report_path.substr(0, report_path.size() - suffix.size()) + ".summary.json";
  return report_path + ".summary.json";
}

std::string frame_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d.png", i);
  return buf;
}

}  // namespace

EvalSummary evaluate_model(ParamStore& store, const ModelConfig& cfg, data::Dataset& ds,
                           const std::string& report_path, const std::string& vmaf_cmd) {
  std::ofstream report(report_path, std::ios::trunc);
  FCVSR_CHECK(report.good(), "evaluate: cannot open " + report_path);

  const bool dump_frames = !vmaf_cmd.empty();
  const fs::path frames_root = fs::path(report_path + ".frames");

  json seq_summaries = json::array();
  EvalSummary overall;
  for (int s = 0; s < ds.num_sequences(); ++s) {
    const auto& rec = ds.manifest().sequences[s];
    if (rec.failed || rec.lr_frames.empty() || rec.hr_frames.empty()) continue;
    const int n = static_cast<int>(rec.lr_frames.size());

    const fs::path sr_dir = frames_root / rec.name;
    if (dump_frames) fs::create_directories(sr_dir);

    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (int t = 0; t < n; ++t) {
      data::TrainSample clip = ds.full_clip(s, t, cfg.scale);
      Tensor sr = model::infer(store, cfg, clip.lr);
      const double p = metrics::psnr(sr, clip.hr);
      const double m = metrics::ssim(sr, clip.hr);
      psnr_sum += p;
      ssim_sum += m;
      json row{{"sequence", rec.name}, {"frame", t}, {"psnr", p}, {"ssim", m}};
      report << row.dump() << "\n";
      if (dump_frames) image_io::write_png((sr_dir / frame_name(t)).string(), sr);
    }

    json seq_row{{"name", rec.name},
                 {"frames", n},
                 {"psnr", psnr_sum / n},
                 {"ssim", ssim_sum / n}};
    if (dump_frames) {
      const std::string ref_dir = fs::path(rec.hr_frames[0]).parent_path().string();
      auto score = metrics::vmaf_external(vmaf_cmd, ref_dir, sr_dir.string());
      if (score) seq_row["vmaf"] = *score;
    }
    seq_summaries.push_back(std::move(seq_row));

    overall.psnr += psnr_sum;
    overall.ssim += ssim_sum;
    overall.frames += n;
  }
  FCVSR_CHECK(overall.frames > 0, "evaluate: no usable sequences");
  overall.psnr /= static_cast<double>(overall.frames);
  overall.ssim /= static_cast<double>(overall.frames);

  json summary{{"overall",
                {{"psnr", overall.psnr}, {"ssim", overall.ssim}, {"frames", overall.frames}}},
               {"sequences", seq_summaries}};
  std::ofstream sf(summary_path_for(report_path), std::ios::trunc);
  sf << summary.dump(2) << "\n";
  return overall;
}

void infer_dir(ParamStore& store, const ModelConfig& cfg, const std::string& frames_dir,
               const std::string& out_dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(frames_dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  FCVSR_CHECK(!files.empty(), "infer: no frames in " + frames_dir);

  std::vector<Tensor> frames;
  frames.reserve(files.size());
  for (const auto& f : files) {
    Tensor img = image_io::read_png(f.string());
    if (cfg.img_channels == 1 && img.dim(2) == 3) img = data::to_luma(img);
    frames.push_back(std::move(img));
  }

  fs::create_directories(out_dir);
  const int n = static_cast<int>(frames.size());
  for (int t = 0; t < n; ++t) {
    const auto win = data::sample_window(n, t);
    std::vector<Tensor> clip;
    clip.reserve(7);
    for (int i : win) clip.push_back(frames[static_cast<size_t>(i)]);
    Tensor sr = model::infer(store, cfg, clip);
    image_io::write_png((fs::path(out_dir) / files[static_cast<size_t>(t)].filename()).string(),
                        sr);
  }
}

namespace {

Tensor channel_mean_normalized(const Tensor& x) {
  Tensor out({x.dim(0), x.dim(1), 1});
  for (int y = 0; y < x.dim(0); ++y)
    for (int xx = 0; xx < x.dim(1); ++xx) {
      double acc = 0.0;
      for (int c = 0; c < x.dim(2); ++c) acc += x.at(y, xx, c);
      out.at(y, xx, 0) = acc / x.dim(2);
    }
  const auto [mn, mx] = std::minmax_element(out.v.begin(), out.v.end());
  const double lo = *mn, hi = *mx;
  const double span = hi - lo > 0 ? hi - lo : 1.0;
  for (double& v : out.v) v = (v - lo) / span;
  return out;
}

}  // namespace

void dump_subbands(ParamStore& store, const ModelConfig& cfg, const std::vector<Tensor>& frames,
                   const std::string& out_dir) {
  FCVSR_CHECK(!cfg.no_refinement, "subband dump: refinement is disabled in this config");
  fs::create_directories(out_dir);

  Tape tape;
  NoGrad ng(tape);
  ParamContext ctx{tape, store, true};
  std::vector<Var> vars;
  vars.reserve(frames.size());
  for (const Tensor& f : frames) vars.push_back(tape.constant(f));

  Var aligned = model::aligned_feature(ctx, cfg, vars);
  const Tensor& a = tape.val(aligned);
  MaskSet ms = make_mask_set(a.dim(0), a.dim(1), cfg.q_bands, cfg.mask_variant);
  mffr::RefineTrace trace = mffr::mffr_forward_traced(ctx, cfg, "mffr.", aligned, ms);

  for (size_t j = 0; j < trace.bands.size(); ++j) {
    image_io::write_png(
        (fs::path(out_dir) / ("band-S" + std::to_string(j + 1) + ".png")).string(),
        channel_mean_normalized(tape.val(trace.bands[j])));
    image_io::write_png(
        (fs::path(out_dir) / ("band-E" + std::to_string(j + 1) + ".png")).string(),
        channel_mean_normalized(tape.val(trace.enhanced[j])));
  }
  image_io::write_png((fs::path(out_dir) / "refined.png").string(),
                      channel_mean_normalized(tape.val(trace.out)));
}

}  // namespace fcvsr::train
