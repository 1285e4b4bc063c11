#pragma once

#include <optional>

#include "compnerf/io/png_io.hpp"
#include "compnerf/scene/scene.hpp"

namespace compnerf::scene {

struct CameraRig {
  std::vector<Camera> cameras;
  int width = 0, height = 0;
};

// Four side views at 45 degree elevation, evenly spaced in azimuth, aimed at
// the workspace center.
CameraRig make_default_rig(int width, int height, const Aabb& workspace);

struct RayHit {
  double t = 0;
  int object = -1;
  Vec3 normal;
};

// First analytic surface hit along the ray, or nothing.
std::optional<RayHit> raycast_scene(const SceneState& scene, Vec3 origin, Vec3 dir);

struct RenderedView {
  io::ImageU8 rgb;                          // 8-bit RGB, background black
  std::vector<std::vector<uint8_t>> masks;  // per object, row-major in {0,1}
};

// Flat-shaded ray cast with a fixed directional light. Mask pixel (x,y) of
// object j is 1 iff the first hit along that pixel ray belongs to j.
RenderedView render_ground_truth(const SceneState& scene, const Camera& camera);

}  // namespace compnerf::scene
