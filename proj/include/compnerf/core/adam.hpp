#pragma once

#include <cstdint>
#include <vector>

#include "compnerf/core/tensor.hpp"

namespace compnerf {

// ADAM with bias correction. Moment buffers are index-aligned with the
// parameter list handed to adam_step, which must stay stable across steps.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step_count = 0;
  std::vector<std::vector<real>> m;
  std::vector<std::vector<real>> v;
};

void adam_step(std::vector<Tensor>& params, AdamState& state);

void zero_grads(std::vector<Tensor>& params);

}  // namespace compnerf
