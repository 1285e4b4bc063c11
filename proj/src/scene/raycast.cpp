#include "compnerf/scene/raycast.hpp"

#include <algorithm>
#include <cmath>

#include "compnerf/core/parallel.hpp"

namespace compnerf::scene {

CameraRig make_default_rig(int width, int height, const Aabb& workspace) {
  CameraRig rig;
  rig.width = width;
  rig.height = height;
  const Vec3 target = workspace.center();
  const double elevation = M_PI / 4;
  const double radius = 1.6 * workspace.diagonal();
  const double fx = 1.15 * width;  // covers the workspace with some margin
  for (int i = 0; i < 4; ++i) {
    const double az = M_PI / 4 + i * M_PI / 2;
    const Vec3 pos = target + Vec3{std::cos(az) * std::cos(elevation),
                                   std::sin(az) * std::cos(elevation),
                                   std::sin(elevation)} *
                                  radius;
    rig.cameras.push_back(make_lookat_camera(pos, target, fx, fx, width, height));
  }
  return rig;
}

namespace {

std::optional<RayHit> hit_box(const ObjectState& obj, Vec3 o, Vec3 d) {
  const auto& b = std::get<BoxShape>(obj.shape);
  const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
  // Into the box frame (center at half height).
  const Vec3 rel{o.x - obj.position.x, o.y - obj.position.y, o.z - b.height / 2};
  const Vec3 lo2{c * rel.x + s * rel.y, -s * rel.x + c * rel.y, rel.z};
  const Vec3 ld{c * d.x + s * d.y, -s * d.x + c * d.y, d.z};
  const Aabb local{{-b.width / 2, -b.depth / 2, -b.height / 2},
                   {b.width / 2, b.depth / 2, b.height / 2}};
  const auto span = ray_aabb(lo2, ld, local);
  if (!span || span->first <= 1e-9) return std::nullopt;
  const double t = span->first;
  const Vec3 p = lo2 + ld * t;
  // Normal from the dominant face.
  Vec3 ln{0, 0, 0};
  const double dx = std::abs(std::abs(p.x) - b.width / 2);
  const double dy = std::abs(std::abs(p.y) - b.depth / 2);
  const double dz = std::abs(std::abs(p.z) - b.height / 2);
  if (dx <= dy && dx <= dz)
    ln = {p.x > 0 ? 1.0 : -1.0, 0, 0};
  else if (dy <= dz)
    ln = {0, p.y > 0 ? 1.0 : -1.0, 0};
  else
    ln = {0, 0, p.z > 0 ? 1.0 : -1.0};
  const Vec3 wn{c * ln.x - s * ln.y, s * ln.x + c * ln.y, ln.z};
  return RayHit{t, -1, wn};
}

std::optional<RayHit> hit_cylinder(const ObjectState& obj, Vec3 o, Vec3 d) {
  const auto& cy = std::get<CylinderShape>(obj.shape);
  const double ox = o.x - obj.position.x, oy = o.y - obj.position.y;
  std::optional<RayHit> best;
  auto consider = [&](double t, Vec3 n) {
    if (t <= 1e-9) return;
    const double z = o.z + d.z * t;
    if (z < 0 || z > cy.height) return;
    if (!best || t < best->t) best = RayHit{t, -1, n};
  };
  // Lateral surface.
  const double a = d.x * d.x + d.y * d.y;
  if (a > 1e-14) {
    const double bq = 2 * (ox * d.x + oy * d.y);
    const double cq = ox * ox + oy * oy - cy.radius * cy.radius;
    const double disc = bq * bq - 4 * a * cq;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      for (const double t : {(-bq - sq) / (2 * a), (-bq + sq) / (2 * a)}) {
        const double hx = ox + d.x * t, hy = oy + d.y * t;
        consider(t, Vec3{hx, hy, 0}.normalized());
      }
    }
  }
  // Caps.
  if (std::abs(d.z) > 1e-14) {
    for (const double zcap : {0.0, cy.height}) {
      const double t = (zcap - o.z) / d.z;
      if (t <= 1e-9) continue;
      const double hx = ox + d.x * t, hy = oy + d.y * t;
      if (hx * hx + hy * hy <= cy.radius * cy.radius) {
        const Vec3 n{0, 0, zcap > 0 ? 1.0 : -1.0};
        if (!best || t < best->t) best = RayHit{t, -1, n};
      }
    }
  }
  return best;
}

}  // namespace

std::optional<RayHit> raycast_scene(const SceneState& scene, Vec3 origin, Vec3 dir) {
  std::optional<RayHit> best;
  for (size_t j = 0; j < scene.objects.size(); ++j) {
    const auto& obj = scene.objects[j];
    auto hit = obj.is_cylinder() ? hit_cylinder(obj, origin, dir) : hit_box(obj, origin, dir);
    if (hit && (!best || hit->t < best->t)) {
      best = hit;
      best->object = int(j);
    }
  }
  return best;
}

RenderedView render_ground_truth(const SceneState& scene, const Camera& camera) {
  const int w = camera.width, h = camera.height;
  RenderedView out;
  out.rgb.width = w;
  out.rgb.height = h;
  out.rgb.channels = 3;
  out.rgb.pixels.assign(size_t(w) * h * 3, 0);
  out.masks.assign(scene.objects.size(), std::vector<uint8_t>(size_t(w) * h, 0));

  const Vec3 origin = camera.center();
  const Vec3 light = Vec3{0.35, 0.25, 0.9}.normalized();
#pragma omp parallel for schedule(static) if (parallel_enabled())
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 dir = camera.pixel_ray_dir(double(x), double(y));
      const auto hit = raycast_scene(scene, origin, dir);
      if (!hit) continue;
      out.masks[hit->object][size_t(y) * w + x] = 1;
      const double shade = 0.35 + 0.65 * std::max(0.0, hit->normal.dot(light));
      const Vec3 c = scene.objects[hit->object].color * shade;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = std::clamp(ch == 0 ? c.x : (ch == 1 ? c.y : c.z), 0.0, 1.0);
        out.rgb.pixels[(size_t(y) * w + x) * 3 + ch] = uint8_t(std::lround(v * 255.0));
      }
    }
  }
  return out;
}

}  // namespace compnerf::scene
