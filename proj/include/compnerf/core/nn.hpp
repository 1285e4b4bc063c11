#pragma once

#include <string>
#include <vector>

#include "compnerf/core/ops.hpp"
#include "compnerf/core/rng.hpp"

namespace compnerf {

using NamedParams = std::vector<std::pair<std::string, Tensor>>;

struct Linear {
  Tensor weight;  // [in, out]
  Tensor bias;    // [out]
  Tensor operator()(const Tensor& x) const { return add_rowvec(matmul(x, weight), bias); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

Linear make_linear(int64_t in, int64_t out, Rng& rng);

// Dense net with ReLU between layers and a linear head.
struct MLP {
  std::vector<Linear> layers;
  Tensor operator()(Tensor x) const;
  void collect(const std::string& prefix, NamedParams& out) const;
};

MLP make_mlp(const std::vector<int64_t>& dims, Rng& rng);

struct Conv3dLayer {
  Tensor kernel;  // [C_out, C_in, 3, 3, 3]
  Tensor bias;    // [C_out]
  int64_t stride = 1;
  int64_t padding = 1;
  Tensor operator()(const Tensor& x) const { return conv3d(x, kernel, bias, stride, padding); }
  void collect(const std::string& prefix, NamedParams& out) const;
};

Conv3dLayer make_conv3d(int64_t c_in, int64_t c_out, int64_t stride, int64_t padding, Rng& rng);

}  // namespace compnerf
