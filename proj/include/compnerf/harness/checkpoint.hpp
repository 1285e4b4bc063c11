#pragma once

#include <map>

#include "compnerf/harness/model.hpp"

namespace compnerf::harness {

// Single binary file: little-endian header (magic, version, scalar width),
// the config snapshot and RNG state as text blobs, then named raw float
// blocks with optional ADAM moments. Round-trips bit-exactly; any version or
// scalar-width mismatch is rejected on load.
struct CheckpointBlock {
  Shape shape;
  std::vector<real> data;
  bool has_moments = false;
  std::vector<real> m, v;
};

struct Checkpoint {
  static constexpr uint32_t kVersion = 1;
  int64_t iteration = 0;
  std::string config_text;
  std::string rng_state;
  int64_t adam_step = 0;
  std::map<std::string, CheckpointBlock> blocks;

  bool has(const std::string& name) const { return blocks.count(name) > 0; }
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot helpers: params (with aligned ADAM moments when given) in the
// canonical NamedParams order.
void pack_params(Checkpoint& ckpt, const NamedParams& params, const AdamState* adam);
void unpack_params(const Checkpoint& ckpt, NamedParams& params, AdamState* adam);

// Builds a model from the checkpoint's own config snapshot and fills every
// parameter block it carries.
Model model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace compnerf::harness
