#include "compnerf/decoder/nerf.hpp"

#include <cmath>

namespace compnerf::decoder {

Tensor NerfField::encode_points(std::span<const Vec3> points) const {
  const int64_t n = static_cast<int64_t>(points.size());
  const int64_t in = 3 * (1 + 2 * config.fourier_bands);
  std::vector<real> data(n * in);
  const Vec3 c = workspace.center();
  const Vec3 e = workspace.extent();
  for (int64_t i = 0; i < n; ++i) {
    const double p[3] = {2 * (points[i].x - c.x) / e.x, 2 * (points[i].y - c.y) / e.y,
                         2 * (points[i].z - c.z) / e.z};
    real* row = data.data() + i * in;
    for (int a = 0; a < 3; ++a) row[a] = real(p[a]);
    int64_t off = 3;
    for (int b = 0; b < config.fourier_bands; ++b) {
      const double f = std::ldexp(M_PI, b);  // 2^b * pi
      for (int a = 0; a < 3; ++a) {
        row[off + a] = real(std::sin(f * p[a]));
        row[off + 3 + a] = real(std::cos(f * p[a]));
      }
      off += 6;
    }
  }
  return Tensor::from({n, in}, std::move(data));
}

RadianceBatch NerfField::eval(const Tensor& encoded_points, const Tensor& z) const {
  check(z.ndim() == 1 && z.dim(0) == config.latent_dim,
        "NerfField: latent " + shape_str(z.shape()) + " does not match k=" +
            std::to_string(config.latent_dim));
  const int64_t n = encoded_points.dim(0);
  Tensor lifted = relu(lift(encoded_points));
  Tensor h = relu(trunk(concat_cols({lifted, broadcast_row(z, n)})));
  RadianceBatch out;
  out.sigma = reshape(softplus(sigma_head(h)), {n});
  out.color = sigmoid(color_head(h));
  return out;
}

RadianceBatch NerfField::eval_points(std::span<const Vec3> points, const Tensor& z) const {
  return eval(encode_points(points), z);
}

void NerfField::collect(NamedParams& out) const {
  lift.collect("nerf.lift", out);
  trunk.collect("nerf.trunk", out);
  sigma_head.collect("nerf.sigma", out);
  color_head.collect("nerf.color", out);
}

NerfField make_nerf_field(const NerfConfig& cfg, const Aabb& workspace, Rng& rng) {
  NerfField f;
  f.config = cfg;
  f.workspace = workspace;
  const int64_t in = 3 * (1 + 2 * cfg.fourier_bands);
  f.lift = make_mlp({in, cfg.lift_dim}, rng);
  std::vector<int64_t> trunk_dims{cfg.lift_dim + cfg.latent_dim};
  for (int64_t l = 0; l < cfg.layers; ++l) trunk_dims.push_back(cfg.hidden);
  f.trunk = make_mlp(trunk_dims, rng);
  f.sigma_head = make_linear(cfg.hidden, 1, rng);
  f.color_head = make_linear(cfg.hidden, 3, rng);
  return f;
}

RadianceBatch compose(const std::vector<RadianceBatch>& per_object, real color_eps) {
  check(!per_object.empty(), "compose: need at least one object");
  std::vector<Tensor> sigmas, colors;
  for (const auto& rb : per_object) {
    sigmas.push_back(rb.sigma);
    colors.push_back(rb.color);
  }
  RadianceBatch out;
  out.sigma = compose_density(sigmas);
  out.color = compose_color(sigmas, colors, color_eps);
  return out;
}

}  // namespace compnerf::decoder
