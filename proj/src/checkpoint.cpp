#include "fcvsr/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace fcvsr::checkpoint {

namespace {

constexpr const char* kFormat = "fcvsr-checkpoint-v1";

json model_to_json(const ModelConfig& c) {
  return json{{"N", c.n_offsets},
              {"Q", c.q_bands},
              {"R", c.r_groups},
              {"k", c.k_taps},
              {"c", c.channels},
              {"c_img", c.img_channels},
              {"scale", c.scale},
              {"gamma", c.gamma},
              {"mask_variant", mask_variant_to_string(c.mask_variant)},
              {"share_alignment", c.share_alignment},
              {"no_alignment", c.no_alignment},
              {"zero_offsets", c.zero_offsets},
              {"no_refinement", c.no_refinement},
              {"no_feedback", c.no_feedback},
              {"no_feedforward", c.no_feedforward}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig c;
  c.n_offsets = j.at("N").get<int>();
  c.q_bands = j.at("Q").get<int>();
  c.r_groups = j.at("R").get<int>();
  c.k_taps = j.at("k").get<int>();
  c.channels = j.at("c").get<int>();
  c.img_channels = j.at("c_img").get<int>();
  c.scale = j.at("scale").get<int>();
  c.gamma = j.at("gamma").get<double>();
  c.mask_variant = mask_variant_from_string(j.at("mask_variant").get<std::string>());
  c.share_alignment = j.at("share_alignment").get<bool>();
  c.no_alignment = j.value("no_alignment", false);
  c.zero_offsets = j.value("zero_offsets", false);
  c.no_refinement = j.value("no_refinement", false);
  c.no_feedback = j.value("no_feedback", false);
  c.no_feedforward = j.value("no_feedforward", false);
  return c;
}

json loss_to_json(const LossConfig& c) {
  return json{{"alpha", c.alpha},
              {"tau", c.tau},
              {"eps", c.eps},
              {"drop_detail_term", c.drop_detail_term},
              {"drop_base_term", c.drop_base_term}};
}

LossConfig loss_from_json(const json& j) {
  LossConfig c;
  c.alpha = j.at("alpha").get<double>();
  c.tau = j.at("tau").get<double>();
  c.eps = j.at("eps").get<double>();
  c.drop_detail_term = j.value("drop_detail_term", false);
  c.drop_base_term = j.value("drop_base_term", false);
  return c;
}

void append_blob(std::ofstream& bin, json& index, const std::string& name,
                 const std::string& kind, const Tensor& t, int64_t& offset) {
  std::vector<float> buf(t.v.begin(), t.v.end());
  bin.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  index.push_back(json{{"name", name},
                       {"kind", kind},
                       {"shape", t.shape},
                       {"offset", offset},
                       {"count", t.numel()}});
  offset += t.numel();
}

}  // namespace

void save(const std::string& dir, const ParamStore& store, const Snapshot& snap,
          const OptimState* opt) {
  fs::create_directories(dir);

  json manifest{{"format", kFormat},
                {"model", model_to_json(snap.model)},
                {"loss", loss_to_json(snap.loss)},
                {"step", snap.step},
                {"seed", snap.seed},
                {"variant", snap.variant},
                {"adam_t", opt ? opt->t : 0}};
  std::ofstream mf(fs::path(dir) / "manifest.json", std::ios::trunc);
  FCVSR_CHECK(mf.good(), "checkpoint: cannot write manifest in " + dir);
  mf << manifest.dump(2) << "\n";

  std::ofstream bin(fs::path(dir) / "params.bin", std::ios::trunc | std::ios::binary);
  FCVSR_CHECK(bin.good(), "checkpoint: cannot write params.bin in " + dir);
  json index = json::array();
  int64_t offset = 0;
  for (const auto& name : store.names()) {
    append_blob(bin, index, name, "param", store.at(name), offset);
    if (opt) {
      append_blob(bin, index, name, "adam_m", opt->m.at(name), offset);
      append_blob(bin, index, name, "adam_v", opt->v.at(name), offset);
    }
  }
  std::ofstream idx(fs::path(dir) / "index.json", std::ios::trunc);
  FCVSR_CHECK(idx.good(), "checkpoint: cannot write index.json in " + dir);
  idx << index.dump(2) << "\n";
}

Snapshot read_snapshot(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  FCVSR_CHECK(mf.good(), "checkpoint: cannot open manifest in " + dir);
  json manifest = json::parse(mf);
  FCVSR_CHECK(manifest.at("format").get<std::string>() == kFormat,
              "checkpoint: unrecognized format tag");
  Snapshot snap;
  snap.model = model_from_json(manifest.at("model"));
  snap.loss = loss_from_json(manifest.at("loss"));
  snap.step = manifest.at("step").get<int64_t>();
  snap.seed = manifest.at("seed").get<uint64_t>();
  snap.variant = manifest.value("variant", std::string());
  return snap;
}

Snapshot load(const std::string& dir, ParamStore& store, OptimState* opt) {
  Snapshot snap = read_snapshot(dir);

  std::ifstream mf(fs::path(dir) / "manifest.json");
  json manifest = json::parse(mf);
  const int64_t adam_t = manifest.value("adam_t", int64_t{0});

  std::ifstream idxf(fs::path(dir) / "index.json");
  FCVSR_CHECK(idxf.good(), "checkpoint: cannot open index.json in " + dir);
  json index = json::parse(idxf);

  std::ifstream bin(fs::path(dir) / "params.bin", std::ios::binary);
  FCVSR_CHECK(bin.good(), "checkpoint: cannot open params.bin in " + dir);

  size_t loaded_params = 0;
  for (const auto& e : index) {
    const std::string name = e.at("name").get<std::string>();
    const std::string kind = e.at("kind").get<std::string>();
    const std::vector<int> shape = e.at("shape").get<std::vector<int>>();
    const int64_t offset = e.at("offset").get<int64_t>();
    const int64_t count = e.at("count").get<int64_t>();

    if (kind != "param" && !opt) continue;

    Tensor t(shape);
    FCVSR_CHECK(t.numel() == count, "checkpoint: index count mismatch for " + name);
    std::vector<float> buf(static_cast<size_t>(count));
    bin.seekg(offset * static_cast<int64_t>(sizeof(float)));
    bin.read(reinterpret_cast<char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    FCVSR_CHECK(bin.good(), "checkpoint: truncated params.bin reading " + name);
    for (int64_t i = 0; i < count; ++i) t.v[static_cast<size_t>(i)] = buf[static_cast<size_t>(i)];

    if (kind == "param") {
      Tensor& dst = store.at(name);  // throws on unknown name
      FCVSR_CHECK(dst.shape == t.shape, "checkpoint: shape mismatch for " + name);
      dst = std::move(t);
      ++loaded_params;
    } else if (kind == "adam_m") {
      opt->m[name] = std::move(t);
    } else if (kind == "adam_v") {
      opt->v[name] = std::move(t);
    } else {
      fail("checkpoint: unknown blob kind '" + kind + "'");
    }
  }
  FCVSR_CHECK(loaded_params == store.names().size(),
              "checkpoint: parameter set does not cover the model");
  if (opt) opt->t = adam_t;
  return snap;
}

}  // namespace fcvsr::checkpoint
