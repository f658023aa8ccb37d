#include <doctest.h>

#include "fcvsr/model.hpp"
#include "fcvsr/ops.hpp"
#include "helpers.hpp"

using namespace fcvsr;
using testutil::max_abs_diff;
using testutil::rand_tensor;

namespace {

ModelConfig mini_cfg() {
  ModelConfig cfg;
  cfg.n_offsets = 1;
  cfg.q_bands = 2;
  cfg.r_groups = 1;
  cfg.k_taps = 3;
  cfg.channels = 4;
  cfg.img_channels = 3;
  cfg.scale = 4;
  return cfg;
}

std::vector<Tensor> clip(int h, int w, int c, uint64_t seed) {
  std::vector<Tensor> frames;
  for (int t = 0; t < 7; ++t) frames.push_back(rand_tensor({h, w, c}, seed + t, 0.0, 1.0));
  return frames;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("forward produces an exactly 4x-upscaled frame") {
  ModelConfig cfg = mini_cfg();
  for (auto hw : {std::pair<int, int>{8, 8}, {8, 12}, {10, 6}}) {
    ParamStore store(31);
    Tape tape;
    ParamContext ctx{tape, store, false};
    Var out = model::forward(ctx, cfg, clip(hw.first, hw.second, 3, 300));
    CHECK(tape.val(out).shape == std::vector<int>{hw.first * 4, hw.second * 4, 3});
  }
  cfg.scale = 2;
  cfg.img_channels = 1;
  ParamStore store(31);
  Tape tape;
  ParamContext ctx{tape, store, false};
  Var out = model::forward(ctx, cfg, clip(6, 8, 1, 301));
  CHECK(tape.val(out).shape == std::vector<int>{12, 16, 1});
}

TEST_CASE("zeroed reconstruction head leaves the bilinear upsample") {
  ModelConfig cfg = mini_cfg();
  ParamStore store(32);
  model::materialize(store, cfg);
  store.at("rec.out.w").v.assign(store.at("rec.out.w").v.size(), 0.0);
  store.at("rec.out.b").v.assign(store.at("rec.out.b").v.size(), 0.0);

  auto frames = clip(8, 8, 3, 302);
  Tape tape;
  ParamContext ctx{tape, store, false};
  Var out = model::forward(ctx, cfg, frames);
  Tensor up = nn::bilinear_resize(frames[3], 32, 32);
  CHECK(max_abs_diff(tape.val(out), up) < 1e-6);

  // inference additionally clamps, but frames here live in [0,1] already
  Tensor inf = model::infer(store, cfg, frames);
  for (int64_t i = 0; i < up.numel(); ++i) {
    const double want = std::min(1.0, std::max(0.0, up.v[i]));
    CHECK(inf.v[i] == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("forward is deterministic given seed and inputs") {
  ModelConfig cfg = mini_cfg();
  auto frames = clip(6, 6, 3, 303);
  Tensor a, b;
  {
    ParamStore store(33);
    Tape tape;
    ParamContext ctx{tape, store, false};
    a = tape.val(model::forward(ctx, cfg, frames));
  }
  {
    ParamStore store(33);
    Tape tape;
    ParamContext ctx{tape, store, false};
    b = tape.val(model::forward(ctx, cfg, frames));
  }
  CHECK(max_abs_diff(a, b) == 0.0);
}

TEST_CASE("the two published sizes match their parameter budgets") {
  ModelConfig big = preset_fcvsr();
  CHECK(big.n_offsets == 6);
  CHECK(big.q_bands == 8);
  CHECK(big.r_groups == 10);
  ModelConfig small = preset_fcvsr_s();
  CHECK(small.n_offsets == 4);
  CHECK(small.q_bands == 4);
  CHECK(small.r_groups == 3);

  const int64_t pc_big = model::param_count(big);
  const int64_t pc_small = model::param_count(small);
  CHECK(std::abs(pc_big - 8810000.0) / 8810000.0 < 0.25);
  CHECK(std::abs(pc_small - 3700000.0) / 3700000.0 < 0.25);
  CHECK(pc_big > pc_small);
}

TEST_CASE("parameter count is affine in the residual-group depth") {
  ModelConfig cfg = mini_cfg();
  cfg.r_groups = 1;
  const int64_t p1 = model::param_count(cfg);
  cfg.r_groups = 2;
  const int64_t p2 = model::param_count(cfg);
  cfg.r_groups = 5;
  const int64_t p5 = model::param_count(cfg);
  const int64_t per_group = p2 - p1;
  CHECK(per_group > 0);
  CHECK(p5 == p1 + 4 * per_group);
}

TEST_CASE("unshared alignment multiplies the estimator parameters") {
  ModelConfig cfg = mini_cfg();
  cfg.share_alignment = true;
  auto shared = model::param_count_by_module(cfg);
  cfg.share_alignment = false;
  auto split = model::param_count_by_module(cfg);
  auto total = [](const std::vector<std::pair<std::string, int64_t>>& v, const std::string& key) {
    for (const auto& [name, n] : v)
      if (name == key) return n;
    return int64_t{0};
  };
  // three tree positions, each with its own estimator/predictor/fusion
  CHECK(total(split, "align") == 3 * total(shared, "align"));
  CHECK(total(split, "rec") == total(shared, "rec"));
  CHECK(total(split, "embed") == total(shared, "embed"));
}

TEST_CASE("ablated variants still run and change the parameter set") {
  auto frames = clip(6, 6, 3, 304);
  ModelConfig base = mini_cfg();
  const int64_t pc_base = model::param_count(base);

  ModelConfig noal = base;
  noal.no_alignment = true;
  ModelConfig nome = base;
  nome.zero_offsets = true;
  ModelConfig noref = base;
  noref.no_refinement = true;
  for (const ModelConfig* cfg : {&noal, &nome, &noref}) {
    ParamStore store(34);
    Tape tape;
    ParamContext ctx{tape, store, false};
    Var out = model::forward(ctx, *cfg, frames);
    CHECK(tape.val(out).shape == std::vector<int>{24, 24, 3});
    CHECK(model::param_count(*cfg) < pc_base);
  }

  ParamStore store(34);
  Tape tape;
  ParamContext ctx{tape, store, false};
  model::forward(ctx, noal, frames);
  CHECK(store.has("align.cat.w"));      // concat fusion replaces the tree
  CHECK_FALSE(store.has("align.me.cb1.c0.w"));
}

TEST_CASE("config validation rejects broken setups") {
  ModelConfig cfg = mini_cfg();
  cfg.k_taps = 4;
  CHECK_THROWS(cfg.validate());
  cfg = mini_cfg();
  cfg.scale = 0;
  CHECK_THROWS(cfg.validate());
  cfg = mini_cfg();
  cfg.no_feedback = true;
  cfg.no_feedforward = true;
  CHECK_THROWS(cfg.validate());
  cfg = mini_cfg();
  cfg.q_bands = 0;
  CHECK_THROWS(cfg.validate());
  CHECK_NOTHROW(mini_cfg().validate());

  Tape tape;
  ParamStore store(35);
  ParamContext ctx{tape, store, false};
  auto frames = clip(6, 6, 3, 305);
  frames.pop_back();
  CHECK_THROWS(model::forward(ctx, mini_cfg(), frames));  // needs the full window
}

TEST_SUITE_END();
