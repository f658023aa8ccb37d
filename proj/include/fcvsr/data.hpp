#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "fcvsr/tensor.hpp"

namespace fcvsr::data {

// Catmull-Rom bicubic resize; the kernel is widened when shrinking so the
// result is antialiased.
Tensor bicubic_resize(const Tensor& x, int oh, int ow);

// BT.601 luma from an RGB frame ({h,w,3} -> {h,w,1}); 1-channel passes through.
Tensor to_luma(const Tensor& img);

struct Degradation {
  std::string mode = "none";  // "QP" | "CRF" | "none"
  int value = 0;
  std::string encoder_cmd;    // template with {input} {output} {qp} {crf}
  int scale = 4;
};

struct SequenceRecord {
  std::string name;
  std::vector<std::string> hr_frames;
  std::vector<std::string> lr_frames;
  Degradation degradation;
  bool failed = false;
};

struct DatasetManifest {
  std::vector<SequenceRecord> sequences;
  void validate() const;  // per usable sequence: frames present, |hr| == |lr|
};

// one JSON object per line
DatasetManifest read_manifest(const std::string& path);
void write_manifest(const std::string& path, const DatasetManifest& m);

// src_dir holds one subdirectory of PNG frames per sequence. Writes
// out_dir/<seq>/hr and /lr frame files plus out_dir/manifest.jsonl (also
// returned). Encoding failures mark the sequence failed and the run continues.
DatasetManifest prepare_dataset(const std::string& src_dir, const std::string& out_dir,
                                int scale, const std::string& mode, int value,
                                const std::string& encoder_cmd, int img_channels);

// frame indices t-3..t+3, reflected at the sequence edges
std::array<int, 7> sample_window(int length, int t);

struct TrainSample {
  std::vector<Tensor> lr;  // 7 frames
  Tensor hr;               // center reference
  Tensor up;               // bilinear x-scale of the center LR frame
};

// Random aligned crop (hr_patch on the reference grid, hr_patch/scale on the
// LR grid) plus one of the 8 axis-aligned symmetries, identical across all
// frames; `up` is rebuilt from the transformed center. Same seed, same result.
TrainSample crop_and_augment(const TrainSample& s, int hr_patch, int scale, uint64_t seed);

class FrameCache {
 public:
  explicit FrameCache(size_t capacity = 256) : capacity_(capacity) {}
  const Tensor& get(const std::string& path);

 private:
  size_t capacity_;
  std::unordered_map<std::string, Tensor> map_;
  std::deque<std::string> order_;
};

// Deterministic sample stream over the usable sequences of a manifest.
class Dataset {
 public:
  explicit Dataset(DatasetManifest m);

  int64_t size() const { return static_cast<int64_t>(index_.size()); }
  int num_sequences() const { return static_cast<int>(manifest_.sequences.size()); }
  const DatasetManifest& manifest() const { return manifest_; }

  // training patch for slot `idx` of batch `step`; identical for identical
  // (seed, step, idx) no matter who asks or in what order
  TrainSample sample(uint64_t seed, int64_t step, int idx, int hr_patch, int scale);

  // whole-frame window around (sequence, t), no augmentation; hr empty if the
  // sequence has no reference frames
  TrainSample full_clip(int sequence, int t, int scale);

 private:
  DatasetManifest manifest_;
  struct Center {
    int seq;
    int t;
  };
  std::vector<Center> index_;
  FrameCache cache_;
};

}  // namespace fcvsr::data
