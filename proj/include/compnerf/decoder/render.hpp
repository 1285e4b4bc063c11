#pragma once

#include <optional>

#include "compnerf/core/rng.hpp"
#include "compnerf/decoder/nerf.hpp"
#include "compnerf/encoder/encoder.hpp"
#include "compnerf/io/png_io.hpp"

namespace compnerf::decoder {

struct RenderConfig {
  int n_samples = 64;          // quadrature samples per ray
  bool stratified = false;     // jittered bins (training); midpoint otherwise
  int mask_dilation_px = 4;    // enlargement of the union training mask
};

// Per-ray near/far workspace bounds (slab method); nullopt on a miss.
std::optional<std::pair<double, double>> ray_bounds(Vec3 origin, Vec3 dir, const Aabb& box);

struct RaySet {
  std::vector<Vec3> origins;
  std::vector<Vec3> dirs;                                 // unit
  std::vector<std::optional<std::pair<double, double>>> bounds;
  size_t hit_count() const;
};

RaySet build_pixel_rays(const Camera& cam, std::span<const std::pair<int, int>> pixels,
                        const Aabb& box);

// Differentiable quadrature render of the composed per-object fields for the
// rays that intersect the workspace. Returns [H',3] where H' = hit_count(),
// in ray order; `hit_rows` maps ray index -> row (or -1 for misses, which
// render black with unit transmittance).
Tensor render_rays(const NerfField& field, const std::vector<Tensor>& latents,
                   const RaySet& rays, const RenderConfig& cfg, Rng* rng,
                   std::vector<int64_t>* hit_rows = nullptr);

struct TrainingRays {
  std::vector<uint8_t> mask_total;     // M_tot, union of object masks
  std::vector<uint8_t> mask_enlarged;  // dilated union
  std::vector<std::pair<int, int>> pixels;  // all pixels where the enlarged mask is 1
};

TrainingRays select_training_rays(const std::vector<std::vector<uint8_t>>& masks, int width,
                                  int height, int dilation_px);

struct ReconLossStats {
  int empty_pixel_sets = 0;  // warning counter
};

// Masked L2 reconstruction loss on a random `ray_budget`-subset of the
// enlarged-mask pixels of view `view_index`; targets are the image with the
// background zeroed outside M_tot. Mean over pixels of the summed squared
// channel differences.
Tensor recon_loss(const NerfField& field, const std::vector<Tensor>& latents,
                  const std::vector<encoder::PosedView>& views, int view_index,
                  const Aabb& box, const RenderConfig& cfg, int ray_budget, Rng& rng,
                  ReconLossStats* stats = nullptr);

// Full-frame render: black outside the enlarged union mask when masks are
// given, every pixel otherwise (novel-view mode).
io::ImageU8 render_image(const NerfField& field, const std::vector<Tensor>& latents,
                         const Camera& cam, const Aabb& box, const RenderConfig& cfg,
                         const std::vector<std::vector<uint8_t>>* masks = nullptr);

// Squared-error image metrics used by evaluation: mean over the given pixel
// set of the summed squared channel differences.
double masked_mse(const io::ImageU8& a, const io::ImageU8& b,
                  const std::vector<uint8_t>& pixel_set);

}  // namespace compnerf::decoder
