#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>

#include "fcvsr/config.hpp"
#include "fcvsr/nn.hpp"

namespace fcvsr::checkpoint {

// Adam accumulators, one pair of tensors per parameter.
struct OptimState {
  std::unordered_map<std::string, Tensor> m, v;
  int64_t t = 0;  // completed update count (bias correction uses t)
};

struct Snapshot {
  ModelConfig model;
  LossConfig loss;
  int64_t step = 0;
  uint64_t seed = 0;
  std::string variant;  // empty for the unmodified graph
};

// Directory layout:
//   manifest.json  - format tag, configs, step, seed, variant, adam t
//   index.json     - [{name, kind, shape, offset, count}], offsets into params.bin
//   params.bin     - little-endian f32, concatenated in index order
void save(const std::string& dir, const ParamStore& store, const Snapshot& snap,
          const OptimState* opt);

// Reads manifest.json only (cheap; used to recover configs before materializing).
Snapshot read_snapshot(const std::string& dir);

// Fills an already-materialized store (and optionally the Adam state) from the
// blobs. Unknown names, missing names, or shape mismatches are errors.
Snapshot load(const std::string& dir, ParamStore& store, OptimState* opt);

}  // namespace fcvsr::checkpoint
