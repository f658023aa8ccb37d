#include "fcvsr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fcvsr/image_io.hpp"
#include "fcvsr/nn.hpp"
#include "fcvsr/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fcvsr::data {

namespace {

double cubic_keys(double t) {  // a = -0.5
  t = std::fabs(t);
  if (t <= 1.0) return (1.5 * t - 2.5) * t * t + 1.0;
  if (t < 2.0) return ((-0.5 * t + 2.5) * t - 4.0) * t + 2.0;
  return 0.0;
}

// resample the leading axis of {n, stride} data; `stride` indexes everything
// that is not the resampled axis
void resample_rows(const std::vector<double>& src, int n, int64_t stride,
                   std::vector<double>& dst, int m) {
  const double ratio = static_cast<double>(n) / m;
  const double s = std::max(1.0, ratio);  // widen the kernel when shrinking
  const int support = static_cast<int>(std::ceil(2.0 * s));
  std::vector<double> w(2 * support + 1);
  for (int i = 0; i < m; ++i) {
    const double center = (i + 0.5) * ratio - 0.5;
    const int j0 = static_cast<int>(std::floor(center)) - support + 1;
    double sum = 0.0;
    for (int j = 0; j < 2 * support + 1; ++j) {
      w[j] = cubic_keys((j0 + j - center) / s);
      sum += w[j];
    }
    for (double& x : w) x /= sum;
    for (int64_t k = 0; k < stride; ++k) {
      double acc = 0.0;
      for (int j = 0; j < 2 * support + 1; ++j) {
        const int src_i = std::clamp(j0 + j, 0, n - 1);
        acc += w[j] * src[src_i * stride + k];
      }
      dst[i * stride + k] = acc;
    }
  }
}

}  // namespace

Tensor bicubic_resize(const Tensor& x, int oh, int ow) {
  FCVSR_CHECK(x.rank() == 3, "bicubic_resize: expected {h,w,c}");
  FCVSR_CHECK(oh >= 1 && ow >= 1, "bicubic_resize: bad target size");
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);

  Tensor mid({oh, w, c});
  resample_rows(x.v, h, static_cast<int64_t>(w) * c, mid.v, oh);

  // columns: transpose, resample, transpose back
  std::vector<double> t(static_cast<size_t>(w) * oh * c);
  for (int y = 0; y < oh; ++y)
    for (int xx = 0; xx < w; ++xx)
      for (int ch = 0; ch < c; ++ch)
        t[(static_cast<size_t>(xx) * oh + y) * c + ch] = mid.at(y, xx, ch);
  std::vector<double> t2(static_cast<size_t>(ow) * oh * c);
  resample_rows(t, w, static_cast<int64_t>(oh) * c, t2, ow);

  Tensor out({oh, ow, c});
  for (int y = 0; y < oh; ++y)
    for (int xx = 0; xx < ow; ++xx)
      for (int ch = 0; ch < c; ++ch)
        out.at(y, xx, ch) = t2[(static_cast<size_t>(xx) * oh + y) * c + ch];
  return out;
}

Tensor to_luma(const Tensor& img) {
  FCVSR_CHECK(img.rank() == 3, "to_luma: expected {h,w,c}");
  if (img.dim(2) == 1) return img;
  FCVSR_CHECK(img.dim(2) == 3, "to_luma: expected 1 or 3 channels");
  Tensor y({img.dim(0), img.dim(1), 1});
  for (int r = 0; r < img.dim(0); ++r)
    for (int c = 0; c < img.dim(1); ++c)
      y.at(r, c, 0) =
          0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
  return y;
}

void DatasetManifest::validate() const {
  for (const auto& s : sequences) {
    if (s.failed) continue;
    FCVSR_CHECK(!s.hr_frames.empty() || !s.lr_frames.empty(),
                "manifest: sequence '" + s.name + "' has no frames");
    if (!s.hr_frames.empty())
      FCVSR_CHECK(s.hr_frames.size() == s.lr_frames.size(),
                  "manifest: sequence '" + s.name + "' frame count mismatch");
    for (const auto& p : s.hr_frames)
      FCVSR_CHECK(fs::exists(p), "manifest: missing frame " + p);
    for (const auto& p : s.lr_frames)
      FCVSR_CHECK(fs::exists(p), "manifest: missing frame " + p);
  }
}

namespace {

json degradation_to_json(const Degradation& d) {
  return json{{"mode", d.mode}, {"value", d.value}, {"encoder_cmd", d.encoder_cmd},
              {"scale", d.scale}};
}

Degradation degradation_from_json(const json& j) {
  Degradation d;
  d.mode = j.at("mode").get<std::string>();
  d.value = j.at("value").get<int>();
  d.encoder_cmd = j.value("encoder_cmd", std::string());
  d.scale = j.at("scale").get<int>();
  return d;
}

}  // namespace

DatasetManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  FCVSR_CHECK(in.good(), "read_manifest: cannot open " + path);
  DatasetManifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    SequenceRecord s;
    s.name = j.at("name").get<std::string>();
    s.hr_frames = j.at("hr").get<std::vector<std::string>>();
    s.lr_frames = j.at("lr").get<std::vector<std::string>>();
    s.degradation = degradation_from_json(j.at("degradation"));
    s.failed = j.value("failed", false);
    m.sequences.push_back(std::move(s));
  }
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::trunc);
  FCVSR_CHECK(out.good(), "write_manifest: cannot open " + path);
  for (const auto& s : m.sequences) {
    json j{{"name", s.name},
           {"hr", s.hr_frames},
           {"lr", s.lr_frames},
           {"degradation", degradation_to_json(s.degradation)},
           {"failed", s.failed}};
    out << j.dump() << "\n";
  }
}

namespace {

std::vector<fs::path> sorted_pngs(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string substitute(std::string s, const std::string& key, const std::string& value) {
  size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
  return s;
}

std::string frame_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d.png", i);
  return buf;
}

}  // namespace

DatasetManifest prepare_dataset(const std::string& src_dir, const std::string& out_dir,
                                int scale, const std::string& mode, int value,
                                const std::string& encoder_cmd, int img_channels) {
  FCVSR_CHECK(scale >= 1, "prepare_dataset: bad scale");
  FCVSR_CHECK(mode == "none" || mode == "QP" || mode == "CRF",
              "prepare_dataset: mode must be none, QP or CRF");
  FCVSR_CHECK(mode == "none" || !encoder_cmd.empty(),
              "prepare_dataset: encoder command required for mode " + mode);
  FCVSR_CHECK(img_channels == 1 || img_channels == 3, "prepare_dataset: channels must be 1 or 3");

  std::vector<fs::path> seq_dirs;
  for (const auto& e : fs::directory_iterator(src_dir))
    if (e.is_directory()) seq_dirs.push_back(e.path());
  std::sort(seq_dirs.begin(), seq_dirs.end());
  FCVSR_CHECK(!seq_dirs.empty(), "prepare_dataset: no sequence directories in " + src_dir);

  fs::create_directories(out_dir);
  DatasetManifest manifest;

  for (const auto& sdir : seq_dirs) {
    SequenceRecord rec;
    rec.name = sdir.filename().string();
    rec.degradation = {mode, value, encoder_cmd, scale};

    const fs::path base = fs::path(out_dir) / rec.name;
    const fs::path hr_dir = base / "hr";
    const fs::path lr_dir = base / "lr";
    const fs::path stage_dir = base / ".pre";
    fs::create_directories(hr_dir);
    fs::create_directories(lr_dir);
    fs::create_directories(stage_dir);

    const auto frames = sorted_pngs(sdir);
    FCVSR_CHECK(!frames.empty(), "prepare_dataset: no frames in " + sdir.string());

    for (size_t i = 0; i < frames.size(); ++i) {
      Tensor hr = image_io::read_png(frames[i].string());
      if (img_channels == 1) hr = to_luma(hr);
      FCVSR_CHECK(hr.dim(0) % scale == 0 && hr.dim(1) % scale == 0,
                  "prepare_dataset: frame " + frames[i].string() +
                      " dimensions not divisible by scale");
      const std::string name = frame_name(static_cast<int>(i));
      image_io::write_png((hr_dir / name).string(), hr);
      Tensor lr = bicubic_resize(hr, hr.dim(0) / scale, hr.dim(1) / scale);
      image_io::write_png((stage_dir / name).string(),
                          lr);  // staged pre-encode frames
      rec.hr_frames.push_back((hr_dir / name).string());
    }

    if (mode == "none") {
      for (size_t i = 0; i < frames.size(); ++i) {
        const std::string name = frame_name(static_cast<int>(i));
        fs::copy_file(stage_dir / name, lr_dir / name, fs::copy_options::overwrite_existing);
      }
    } else {
      std::string cmd = substitute(encoder_cmd, "{input}", stage_dir.string());
      cmd = substitute(cmd, "{output}", lr_dir.string());
      cmd = substitute(cmd, "{qp}", std::to_string(value));
      cmd = substitute(cmd, "{crf}", std::to_string(value));
      const int status = std::system(cmd.c_str());
      if (status != 0) {
        std::fprintf(stderr, "warning: encoder failed for sequence %s (status %d)\n",
                     rec.name.c_str(), status);
        rec.failed = true;
      }
    }

    if (!rec.failed) {
      for (size_t i = 0; i < frames.size(); ++i) {
        const fs::path lr_frame = lr_dir / frame_name(static_cast<int>(i));
        if (!fs::exists(lr_frame)) {
          std::fprintf(stderr, "warning: encoder produced no frame %s for sequence %s\n",
                       lr_frame.string().c_str(), rec.name.c_str());
          rec.failed = true;
          break;
        }
        rec.lr_frames.push_back(lr_frame.string());
      }
    }
    if (rec.failed) rec.lr_frames.clear();

    fs::remove_all(stage_dir);
    manifest.sequences.push_back(std::move(rec));
  }

  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), manifest);
  return manifest;
}

std::array<int, 7> sample_window(int length, int t) {
  FCVSR_CHECK(length >= 1, "sample_window: empty sequence");
  std::array<int, 7> w;
  for (int i = 0; i < 7; ++i) w[i] = reflect_index(t - 3 + i, length);
  return w;
}

namespace {

Tensor dihedral(const Tensor& x, int d) {
  const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const bool hflip = d & 1, vflip = d & 2, transpose = d & 4;
  Tensor out(transpose ? std::vector<int>{w, h, c} : std::vector<int>{h, w, c});
  for (int y = 0; y < h; ++y) {
    const int sy = vflip ? h - 1 - y : y;
    for (int xx = 0; xx < w; ++xx) {
      const int sx = hflip ? w - 1 - xx : xx;
      for (int ch = 0; ch < c; ++ch) {
        if (transpose)
          out.at(xx, y, ch) = x.at(sy, sx, ch);
        else
          out.at(y, xx, ch) = x.at(sy, sx, ch);
      }
    }
  }
  return out;
}

Tensor crop(const Tensor& x, int y0, int x0, int ph, int pw) {
  Tensor out({ph, pw, x.dim(2)});
  for (int y = 0; y < ph; ++y)
    for (int xx = 0; xx < pw; ++xx)
      for (int ch = 0; ch < x.dim(2); ++ch) out.at(y, xx, ch) = x.at(y0 + y, x0 + xx, ch);
  return out;
}

}  // namespace

TrainSample crop_and_augment(const TrainSample& s, int hr_patch, int scale, uint64_t seed) {
  FCVSR_CHECK(hr_patch % scale == 0, "crop_and_augment: patch not divisible by scale");
  FCVSR_CHECK(s.lr.size() == 7, "crop_and_augment: expected a 7-frame window");
  const int lp = hr_patch / scale;
  const int lh = s.lr[0].dim(0), lw = s.lr[0].dim(1);
  FCVSR_CHECK(lp <= lh && lp <= lw, "crop_and_augment: patch larger than frame");
  FCVSR_CHECK(s.hr.dim(0) == lh * scale && s.hr.dim(1) == lw * scale,
              "crop_and_augment: reference frame does not match scale");

  Rng rng(seed);
  const int y0 = static_cast<int>(rng.below(lh - lp + 1));
  const int x0 = static_cast<int>(rng.below(lw - lp + 1));
  const int d = static_cast<int>(rng.below(8));

  TrainSample out;
  out.lr.reserve(7);
  for (const Tensor& f : s.lr) out.lr.push_back(dihedral(crop(f, y0, x0, lp, lp), d));
  out.hr = dihedral(crop(s.hr, y0 * scale, x0 * scale, hr_patch, hr_patch), d);
  out.up = nn::bilinear_resize(out.lr[3], out.lr[3].dim(0) * scale, out.lr[3].dim(1) * scale);
  return out;
}

const Tensor& FrameCache::get(const std::string& path) {
  auto it = map_.find(path);
  if (it != map_.end()) return it->second;
  while (map_.size() >= capacity_) {
    map_.erase(order_.front());
    order_.pop_front();
  }
  order_.push_back(path);
  return map_.emplace(path, image_io::read_png(path)).first->second;
}

Dataset::Dataset(DatasetManifest m) : manifest_(std::move(m)) {
  manifest_.validate();
  for (int s = 0; s < static_cast<int>(manifest_.sequences.size()); ++s) {
    const auto& rec = manifest_.sequences[s];
    if (rec.failed || rec.lr_frames.empty() || rec.hr_frames.empty()) continue;
    for (int t = 0; t < static_cast<int>(rec.lr_frames.size()); ++t) index_.push_back({s, t});
  }
  FCVSR_CHECK(!index_.empty(), "dataset: no usable training centers");
}

TrainSample Dataset::sample(uint64_t seed, int64_t step, int idx, int hr_patch, int scale) {
  Rng pick(mix_seed(mix_seed(seed, static_cast<uint64_t>(step)), static_cast<uint64_t>(idx)));
  const Center c = index_[static_cast<size_t>(pick.below(size()))];
  TrainSample full = full_clip(c.seq, c.t, scale);
  return crop_and_augment(full, hr_patch, scale, pick.next_u64());
}

TrainSample Dataset::full_clip(int sequence, int t, int scale) {
  FCVSR_CHECK(sequence >= 0 && sequence < num_sequences(), "dataset: bad sequence index");
  const auto& rec = manifest_.sequences[sequence];
  FCVSR_CHECK(!rec.lr_frames.empty(), "dataset: sequence '" + rec.name + "' has no frames");
  FCVSR_CHECK(t >= 0 && t < static_cast<int>(rec.lr_frames.size()), "dataset: bad frame index");
  const auto win = sample_window(static_cast<int>(rec.lr_frames.size()), t);

  TrainSample s;
  s.lr.reserve(7);
  for (int i : win) s.lr.push_back(cache_.get(rec.lr_frames[static_cast<size_t>(i)]));
  if (!rec.hr_frames.empty()) s.hr = cache_.get(rec.hr_frames[static_cast<size_t>(t)]);
  s.up = nn::bilinear_resize(s.lr[3], s.lr[3].dim(0) * scale, s.lr[3].dim(1) * scale);
  return s;
}

}  // namespace fcvsr::data
