#pragma once

#include <span>

#include "compnerf/core/nn.hpp"
#include "compnerf/geom/geom.hpp"

namespace compnerf::decoder {

struct NerfConfig {
  int64_t latent_dim = 64;
  int64_t lift_dim = 64;   // dimension the 3D input is lifted to
  int64_t hidden = 300;    // trunk width
  int64_t layers = 3;      // trunk depth
  int fourier_bands = 0;   // optional positional encoding, off by default
  real color_eps = real(1e-8);  // guard for the density-weighted color
};

struct RadianceBatch {
  Tensor sigma;  // [N], softplus output, >= 0
  Tensor color;  // [N,3], sigmoid output, in [0,1]
};

// Per-object conditional field f(x, z): lift the (workspace-normalized,
// optionally Fourier-encoded) point, concatenate the latent, run the trunk,
// then the softplus/sigmoid heads.
struct NerfField {
  NerfConfig config;
  MLP lift;
  MLP trunk;
  Linear sigma_head;
  Linear color_head;
  Aabb workspace;

  Tensor encode_points(std::span<const Vec3> points) const;  // constant [N,in]
  RadianceBatch eval(const Tensor& encoded_points, const Tensor& z) const;
  RadianceBatch eval_points(std::span<const Vec3> points, const Tensor& z) const;

  void collect(NamedParams& out) const;
};

NerfField make_nerf_field(const NerfConfig& cfg, const Aabb& workspace, Rng& rng);

// Density sum and density-weighted color over objects (bitwise permutation
// invariant; exact pass-through for a single object).
RadianceBatch compose(const std::vector<RadianceBatch>& per_object, real color_eps);

}  // namespace compnerf::decoder
