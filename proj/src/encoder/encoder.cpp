#include "compnerf/encoder/encoder.hpp"

#include <cmath>

namespace compnerf::encoder {

bool mask_contains(const std::vector<uint8_t>& mask, int width, int height,
                   const CamCoord& cc) {
  if (cc.d <= 0) return false;
  const long ix = std::lround(cc.u);
  const long iy = std::lround(cc.v);
  if (ix < 0 || ix >= width || iy < 0 || iy >= height) return false;
  return mask[size_t(iy) * width + ix] != 0;
}

Tensor FeatureEncoderE::eval(const PosedView& view, std::span<const Vec3> points,
                             const Aabb& workspace, std::vector<uint8_t>* valid) const {
  const int64_t n = static_cast<int64_t>(points.size());
  const int w = view.camera.width, h = view.camera.height;
  const double diag = workspace.diagonal();

  std::vector<real> coords(n * 3);
  auto uv = std::make_shared<std::vector<std::array<double, 2>>>(n);
  auto observed = std::make_shared<std::vector<real>>(n, real(0));
  if (valid) valid->assign(n, 0);
  for (int64_t i = 0; i < n; ++i) {
    const CamCoord cc = view.camera.project(points[i]);
    const bool ok = view.camera.in_image(cc);
    (*uv)[i] = {cc.u, cc.v};
    // Normalized camera coordinates: (u,v) to [-1,1], depth by the
    // workspace diagonal.
    coords[i * 3 + 0] = real(2.0 * cc.u / double(w - 1) - 1.0);
    coords[i * 3 + 1] = real(2.0 * cc.v / double(h - 1) - 1.0);
    coords[i * 3 + 2] = real(cc.d / diag);
    if (ok) {
      (*observed)[i] = real(1);
      if (valid) (*valid)[i] = 1;
    }
  }

  Tensor cf = relu(coord_mlp(Tensor::from({n, 3}, std::move(coords))));
  Tensor rgb = bilinear_sample(view.image,
                               std::shared_ptr<const std::vector<std::array<double, 2>>>(uv));
  Tensor feat = feat_mlp(concat_cols({cf, rgb}));
  // Unobserved points contribute the zero vector.
  return rowwise_scale(feat, std::shared_ptr<const std::vector<real>>(observed));
}

void FeatureEncoderE::collect(const std::string& prefix, NamedParams& out) const {
  coord_mlp.collect(prefix + ".coord", out);
  feat_mlp.collect(prefix + ".feat", out);
}

Tensor VolumetricEncoderPhi::encode(const Tensor& feature_grid_rows) const {
  check(feature_grid_rows.ndim() == 2 &&
            feature_grid_rows.dim(0) == grid_depth * grid_rows * grid_cols &&
            feature_grid_rows.dim(1) == feature_dim,
        "Phi: feature grid " + shape_str(feature_grid_rows.shape()) +
            " does not match the network input (" + std::to_string(grid_depth) + "x" +
            std::to_string(grid_rows) + "x" + std::to_string(grid_cols) +
            ", n_o=" + std::to_string(feature_dim) + ")");
  Tensor x = reshape(transpose2d(feature_grid_rows),
                     {feature_dim, grid_depth, grid_rows, grid_cols});
  for (const auto& conv : convs) x = relu(conv(x));
  Tensor flat = reshape(x, {1, x.size()});
  check(flat.dim(1) == dense.layers.front().weight.dim(0),
        "Phi: flattened conv output " + shape_str(flat.shape()) +
            " does not match the dense head");
  Tensor z = dense(flat);
  return reshape(z, {z.dim(1)});
}

void VolumetricEncoderPhi::collect(const std::string& prefix, NamedParams& out) const {
  for (size_t i = 0; i < convs.size(); ++i)
    convs[i].collect(prefix + ".conv" + std::to_string(i), out);
  dense.collect(prefix + ".dense", out);
}

namespace {

// Mask-gated mean over views: sum E over exactly the views where the point
// projects into the object's mask, divided by that view count; the zero
// vector where no view qualifies.
Tensor gated_mean(const std::vector<Tensor>& view_feats,
                  const std::vector<std::vector<uint8_t>>& view_valid,
                  const std::vector<PosedView>& views, int object,
                  std::span<const Vec3> points) {
  const int64_t n = static_cast<int64_t>(points.size());
  const size_t n_views = views.size();
  std::vector<std::vector<real>> weights(n_views, std::vector<real>(n, real(0)));
  std::vector<int> hits(n, 0);
  for (size_t v = 0; v < n_views; ++v) {
    const auto& view = views[v];
    check(object < int(view.masks.size()),
          "object_feature: view lacks a mask for object " + std::to_string(object));
    for (int64_t i = 0; i < n; ++i) {
      if (!view_valid[v][i]) continue;
      const CamCoord cc = view.camera.project(points[i]);
      if (mask_contains(view.masks[object], view.camera.width, view.camera.height, cc)) {
        weights[v][i] = real(1);
        hits[i] += 1;
      }
    }
  }
  Tensor acc;
  for (size_t v = 0; v < n_views; ++v) {
    auto w = std::make_shared<std::vector<real>>(std::move(weights[v]));
    for (int64_t i = 0; i < n; ++i)
      if (hits[i] > 1) (*w)[i] /= real(hits[i]);
    Tensor term = rowwise_scale(view_feats[v], std::shared_ptr<const std::vector<real>>(w));
    acc = acc.defined() ? add(acc, term) : term;
  }
  return acc;
}

std::vector<std::pair<int64_t, int64_t>> chunk_ranges(int64_t n, int64_t chunk) {
  std::vector<std::pair<int64_t, int64_t>> out;
  for (int64_t b = 0; b < n; b += chunk) out.emplace_back(b, std::min(n, b + chunk));
  return out;
}

}  // namespace

Tensor ObjectEncoder::object_feature(const std::vector<PosedView>& views, int object,
                                     std::span<const Vec3> points,
                                     const Aabb& workspace) const {
  check(!views.empty(), "object_feature: need at least one view");
  std::vector<Tensor> feats;
  std::vector<std::vector<uint8_t>> valid(views.size());
  for (size_t v = 0; v < views.size(); ++v)
    feats.push_back(e.eval(views[v], points, workspace, &valid[v]));
  return gated_mean(feats, valid, views, object, points);
}

Tensor ObjectEncoder::encode_object(const std::vector<PosedView>& views, int object,
                                    const WorkspaceGrid& grid) const {
  return encode_object_transformed(views, object, grid, RigidTransform::identity());
}

Tensor ObjectEncoder::encode_object_transformed(const std::vector<PosedView>& views,
                                                int object, const WorkspaceGrid& grid,
                                                const RigidTransform& q) const {
  check(q.is_unit(), "transform_latent: quaternion norm deviates from 1 beyond tolerance");
  std::vector<Vec3> pts(grid.centers.size());
  for (size_t i = 0; i < pts.size(); ++i) pts[i] = q.pullback(grid.centers[i]);
  std::vector<Tensor> rows;
  for (const auto& [lo, hi] : chunk_ranges(grid.size(), config.chunk))
    rows.push_back(object_feature(views, object,
                                  std::span<const Vec3>(pts.data() + lo, hi - lo), grid.box));
  return phi.encode(rows.size() == 1 ? rows[0] : concat_rows(rows));
}

std::vector<Tensor> ObjectEncoder::encode_scene(const std::vector<PosedView>& views,
                                                const WorkspaceGrid& grid) const {
  check(!views.empty(), "encode_scene: need at least one view");
  const size_t m = views[0].masks.size();
  for (const auto& v : views)
    check(v.masks.size() == m, "encode_scene: inconsistent object counts across views (" +
                                   std::to_string(m) + " vs " +
                                   std::to_string(v.masks.size()) + ")");
  // E evaluations are shared across objects; only the mask gating differs.
  std::vector<std::vector<Tensor>> per_object_rows(m);
  for (const auto& [lo, hi] : chunk_ranges(grid.size(), config.chunk)) {
    std::span<const Vec3> pts(grid.centers.data() + lo, hi - lo);
    std::vector<Tensor> feats;
    std::vector<std::vector<uint8_t>> valid(views.size());
    for (size_t v = 0; v < views.size(); ++v)
      feats.push_back(e.eval(views[v], pts, grid.box, &valid[v]));
    for (size_t j = 0; j < m; ++j)
      per_object_rows[j].push_back(gated_mean(feats, valid, views, int(j), pts));
  }
  std::vector<Tensor> latents;
  for (size_t j = 0; j < m; ++j)
    latents.push_back(phi.encode(per_object_rows[j].size() == 1
                                     ? per_object_rows[j][0]
                                     : concat_rows(per_object_rows[j])));
  return latents;
}

void ObjectEncoder::collect(NamedParams& out) const {
  e.collect("encoder.e", out);
  phi.collect("encoder.phi", out);
}

ObjectEncoder make_object_encoder(const EncoderConfig& cfg, const WorkspaceGrid& grid,
                                  Rng& rng) {
  ObjectEncoder enc;
  enc.config = cfg;
  enc.e.coord_mlp = make_mlp({3, cfg.coord_feat}, rng);
  enc.e.feat_mlp =
      make_mlp({cfg.coord_feat + 3, cfg.hidden, cfg.hidden, cfg.feature_dim}, rng);

  enc.phi.grid_depth = grid.depth;
  enc.phi.grid_rows = grid.rows;
  enc.phi.grid_cols = grid.cols;
  enc.phi.feature_dim = cfg.feature_dim;
  const std::vector<int64_t> strides{1, 2, 2};
  int64_t c_in = cfg.feature_dim;
  int64_t d = grid.depth, r = grid.rows, c = grid.cols;
  for (const int64_t s : strides) {
    enc.phi.convs.push_back(make_conv3d(c_in, cfg.phi_channels, s, 1, rng));
    c_in = cfg.phi_channels;
    d = (d + 2 - 3) / s + 1;
    r = (r + 2 - 3) / s + 1;
    c = (c + 2 - 3) / s + 1;
    check(d >= 1 && r >= 1 && c >= 1, "make_object_encoder: grid too small for Phi's strides");
  }
  enc.phi.dense = make_mlp(
      {cfg.phi_channels * d * r * c, cfg.phi_dense, cfg.phi_dense, cfg.latent_dim}, rng);
  return enc;
}

}  // namespace compnerf::encoder
