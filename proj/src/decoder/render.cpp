#include "compnerf/decoder/render.hpp"

#include <algorithm>
#include <cmath>

namespace compnerf::decoder {

std::optional<std::pair<double, double>> ray_bounds(Vec3 origin, Vec3 dir, const Aabb& box) {
  auto span = ray_aabb(origin, dir, box);
  if (!span || span->second <= span->first) return std::nullopt;
  return span;
}

size_t RaySet::hit_count() const {
  size_t n = 0;
  for (const auto& b : bounds) n += b.has_value();
  return n;
}

RaySet build_pixel_rays(const Camera& cam, std::span<const std::pair<int, int>> pixels,
                        const Aabb& box) {
  RaySet rs;
  const Vec3 origin = cam.center();
  rs.origins.reserve(pixels.size());
  rs.dirs.reserve(pixels.size());
  rs.bounds.reserve(pixels.size());
  for (const auto& [x, y] : pixels) {
    const Vec3 d = cam.pixel_ray_dir(double(x), double(y));
    rs.origins.push_back(origin);
    rs.dirs.push_back(d);
    rs.bounds.push_back(ray_bounds(origin, d, box));
  }
  return rs;
}

Tensor render_rays(const NerfField& field, const std::vector<Tensor>& latents,
                   const RaySet& rays, const RenderConfig& cfg, Rng* rng,
                   std::vector<int64_t>* hit_rows) {
  check(!latents.empty(), "render_rays: empty latent set");
  check(cfg.n_samples >= 2, "render_rays: need at least 2 samples per ray");
  const int64_t s_per_ray = cfg.n_samples;

  std::vector<Vec3> points;
  auto layout = std::make_shared<RayLayout>();
  layout->offsets.push_back(0);
  if (hit_rows) hit_rows->assign(rays.bounds.size(), -1);

  int64_t row = 0;
  for (size_t r = 0; r < rays.bounds.size(); ++r) {
    if (!rays.bounds[r]) continue;
    if (hit_rows) (*hit_rows)[r] = row;
    const auto [an, af] = *rays.bounds[r];
    const double bin = (af - an) / double(s_per_ray);
    std::vector<double> alphas(s_per_ray);
    for (int64_t i = 0; i < s_per_ray; ++i) {
      const double jitter = (cfg.stratified && rng) ? rng->uniform() : 0.5;
      alphas[i] = an + (double(i) + jitter) * bin;
    }
    for (int64_t i = 0; i < s_per_ray; ++i) {
      points.push_back(rays.origins[r] + rays.dirs[r] * alphas[i]);
      const double next = (i + 1 < s_per_ray) ? alphas[i + 1] : af;
      layout->deltas.push_back(real(std::max(0.0, next - alphas[i])));
    }
    row += 1;
    layout->offsets.push_back(row * s_per_ray);
  }

  if (points.empty()) {
    if (hit_rows) hit_rows->assign(rays.bounds.size(), -1);
    return Tensor::zeros({0, 3});
  }

  const Tensor encoded = field.encode_points(points);
  std::vector<RadianceBatch> per_object;
  per_object.reserve(latents.size());
  for (const auto& z : latents) per_object.push_back(field.eval(encoded, z));
  const RadianceBatch composed = compose(per_object, field.config.color_eps);
  return volume_render(composed.sigma, composed.color,
                       std::shared_ptr<const RayLayout>(layout));
}

namespace {

std::vector<uint8_t> dilate2d(const std::vector<uint8_t>& mask, int width, int height,
                              int radius) {
  if (radius <= 0) return mask;
  std::vector<uint8_t> out(mask.size(), 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      if (!mask[size_t(y) * width + x]) continue;
      const int y0 = std::max(0, y - radius), y1 = std::min(height - 1, y + radius);
      const int x0 = std::max(0, x - radius), x1 = std::min(width - 1, x + radius);
      for (int yy = y0; yy <= y1; ++yy)
        for (int xx = x0; xx <= x1; ++xx) out[size_t(yy) * width + xx] = 1;
    }
  return out;
}

}  // namespace

TrainingRays select_training_rays(const std::vector<std::vector<uint8_t>>& masks, int width,
                                  int height, int dilation_px) {
  TrainingRays tr;
  tr.mask_total.assign(size_t(width) * height, 0);
  for (const auto& m : masks) {
    check(m.size() == tr.mask_total.size(), "select_training_rays: mask extent mismatch");
    for (size_t i = 0; i < m.size(); ++i) tr.mask_total[i] |= (m[i] != 0);
  }
  tr.mask_enlarged = dilate2d(tr.mask_total, width, height, dilation_px);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (tr.mask_enlarged[size_t(y) * width + x]) tr.pixels.emplace_back(x, y);
  return tr;
}

Tensor recon_loss(const NerfField& field, const std::vector<Tensor>& latents,
                  const std::vector<encoder::PosedView>& views, int view_index,
                  const Aabb& box, const RenderConfig& cfg, int ray_budget, Rng& rng,
                  ReconLossStats* stats) {
  const auto& view = views[view_index];
  const int w = view.camera.width, h = view.camera.height;
  TrainingRays tr = select_training_rays(view.masks, w, h, cfg.mask_dilation_px);
  if (tr.pixels.empty()) {
    if (stats) stats->empty_pixel_sets += 1;
    return Tensor::scalar(0);
  }

  std::vector<std::pair<int, int>> chosen = tr.pixels;
  if (ray_budget > 0 && size_t(ray_budget) < chosen.size()) {
    // Partial Fisher-Yates: the first `ray_budget` entries are a uniform
    // subset, in a deterministic order for a fixed rng state.
    for (int i = 0; i < ray_budget; ++i) {
      const int64_t j = i + rng.randint(int64_t(chosen.size()) - i);
      std::swap(chosen[i], chosen[size_t(j)]);
    }
    chosen.resize(ray_budget);
  }
  const int64_t n = static_cast<int64_t>(chosen.size());

  RaySet rays = build_pixel_rays(view.camera, chosen, box);
  std::vector<int64_t> hit_rows;
  Tensor rendered = render_rays(field, latents, rays, cfg, &rng, &hit_rows);

  // Targets: image composed with M_tot (background zeroed).
  const auto img = view.image.data();
  const int64_t plane = int64_t(w) * h;
  std::vector<real> target(rendered.dim(0) * 3, real(0));
  real miss_term = 0;
  for (int64_t i = 0; i < n; ++i) {
    const auto [x, y] = chosen[i];
    const int64_t p = int64_t(y) * w + x;
    real t[3] = {0, 0, 0};
    if (tr.mask_total[p])
      for (int ch = 0; ch < 3; ++ch) t[ch] = img[ch * plane + p];
    if (hit_rows[i] >= 0) {
      for (int ch = 0; ch < 3; ++ch) target[hit_rows[i] * 3 + ch] = t[ch];
    } else {
      // Rays missing the workspace render black; their target error is a
      // constant with no gradient.
      for (int ch = 0; ch < 3; ++ch) miss_term += t[ch] * t[ch];
    }
  }

  Tensor loss_sum;
  if (rendered.dim(0) > 0) {
    Tensor diff = sub(rendered, Tensor::from({rendered.dim(0), 3}, std::move(target)));
    loss_sum = sum(mul(diff, diff));
  } else {
    loss_sum = Tensor::scalar(0);
  }
  return scale(add(loss_sum, Tensor::scalar(miss_term)), real(1) / real(n));
}

io::ImageU8 render_image(const NerfField& field, const std::vector<Tensor>& latents,
                         const Camera& cam, const Aabb& box, const RenderConfig& cfg,
                         const std::vector<std::vector<uint8_t>>* masks) {
  const int w = cam.width, h = cam.height;
  std::vector<std::pair<int, int>> pixels;
  std::vector<uint8_t> selected(size_t(w) * h, 1);
  if (masks) {
    TrainingRays tr = select_training_rays(*masks, w, h, cfg.mask_dilation_px);
    pixels = tr.pixels;
    selected = tr.mask_enlarged;
  } else {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) pixels.emplace_back(x, y);
  }
  RaySet rays = build_pixel_rays(cam, pixels, box);
  std::vector<int64_t> hit_rows;
  RenderConfig eval_cfg = cfg;
  eval_cfg.stratified = false;
  Tensor rendered = render_rays(field, latents, rays, eval_cfg, nullptr, &hit_rows);

  io::ImageU8 img;
  img.width = w;
  img.height = h;
  img.channels = 3;
  img.pixels.assign(size_t(w) * h * 3, 0);
  const auto rd = rendered.data();
  for (size_t i = 0; i < pixels.size(); ++i) {
    if (hit_rows[i] < 0) continue;
    const auto [x, y] = pixels[i];
    for (int ch = 0; ch < 3; ++ch) {
      const double v = std::clamp(double(rd[hit_rows[i] * 3 + ch]), 0.0, 1.0);
      img.pixels[(size_t(y) * w + x) * 3 + ch] = uint8_t(std::lround(v * 255.0));
    }
  }
  (void)selected;
  return img;
}

double masked_mse(const io::ImageU8& a, const io::ImageU8& b,
                  const std::vector<uint8_t>& pixel_set) {
  check(a.width == b.width && a.height == b.height && a.channels == 3 && b.channels == 3,
        "masked_mse: image extent mismatch");
  check(pixel_set.size() == size_t(a.width) * a.height, "masked_mse: pixel set extent");
  double acc = 0;
  int64_t n = 0;
  for (size_t p = 0; p < pixel_set.size(); ++p) {
    if (!pixel_set[p]) continue;
    n += 1;
    for (int ch = 0; ch < 3; ++ch) {
      const double d = (double(a.pixels[p * 3 + ch]) - double(b.pixels[p * 3 + ch])) / 255.0;
      acc += d * d;
    }
  }
  return n > 0 ? acc / double(n) : 0.0;
}

}  // namespace compnerf::decoder
