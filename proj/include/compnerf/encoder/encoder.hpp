#pragma once

#include <span>

#include "compnerf/core/nn.hpp"
#include "compnerf/encoder/workspace_grid.hpp"

namespace compnerf::encoder {

// One camera's posed observation: RGB image as [3,H,W] in [0,1], the 3x4
// projection, and one binary mask per object (row-major, {0,1}).
struct PosedView {
  Tensor image;
  Camera camera;
  std::vector<std::vector<uint8_t>> masks;
};

struct EncoderConfig {
  int64_t feature_dim = 64;    // n_o
  int64_t latent_dim = 64;     // k
  int64_t coord_feat = 32;     // output of the coordinate MLP
  int64_t hidden = 128;        // hidden width of the feature MLP
  int64_t phi_channels = 128;  // 3D conv channels
  int64_t phi_dense = 300;     // dense width after flattening
  int64_t chunk = 8192;        // voxel evaluation chunk (bit-identical by construction)
};

// Pixel-aligned feature encoder E(I, K(x)): a coordinate branch on the
// normalized camera coordinates (u,v,d) concatenated with the bilinear RGB
// lookup, mapped to an n_o feature. Points behind the camera or projecting
// outside the image are unobserved and yield the zero vector.
struct FeatureEncoderE {
  MLP coord_mlp;  // 3 -> coord_feat
  MLP feat_mlp;   // coord_feat+3 -> hidden -> hidden -> n_o

  // Per-point validity (observed in this view) is returned through `valid`.
  Tensor eval(const PosedView& view, std::span<const Vec3> points, const Aabb& workspace,
              std::vector<uint8_t>* valid = nullptr) const;

  void collect(const std::string& prefix, NamedParams& out) const;
};

// Volumetric encoder Phi: object feature grid -> three 3D convolutions
// (strides 1,2,2) -> dense layers -> latent vector.
struct VolumetricEncoderPhi {
  std::vector<Conv3dLayer> convs;
  MLP dense;
  int64_t grid_depth = 0, grid_rows = 0, grid_cols = 0;
  int64_t feature_dim = 0;

  Tensor encode(const Tensor& feature_grid_rows) const;  // [N,n_o] -> [k]
  void collect(const std::string& prefix, NamedParams& out) const;
};

// The scene encoder Omega.
struct ObjectEncoder {
  EncoderConfig config;
  FeatureEncoderE e;
  VolumetricEncoderPhi phi;

  // y_j evaluated at arbitrary query points (mask-gated mean of E over views).
  Tensor object_feature(const std::vector<PosedView>& views, int object,
                        std::span<const Vec3> points, const Aabb& workspace) const;

  // z_j for one object; `pullback` transforms the query set for T(q)[z].
  Tensor encode_object(const std::vector<PosedView>& views, int object,
                       const WorkspaceGrid& grid) const;
  Tensor encode_object_transformed(const std::vector<PosedView>& views, int object,
                                   const WorkspaceGrid& grid, const RigidTransform& q) const;

  // z_{1:m}, sharing the per-view E evaluations across objects.
  std::vector<Tensor> encode_scene(const std::vector<PosedView>& views,
                                   const WorkspaceGrid& grid) const;

  void collect(NamedParams& out) const;
};

ObjectEncoder make_object_encoder(const EncoderConfig& cfg, const WorkspaceGrid& grid,
                                  Rng& rng);

// Nearest-pixel mask membership used by Eq.-style gating.
bool mask_contains(const std::vector<uint8_t>& mask, int width, int height,
                   const CamCoord& cc);

}  // namespace compnerf::encoder
