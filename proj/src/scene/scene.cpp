#include "compnerf/scene/scene.hpp"

#include <algorithm>

namespace compnerf::scene {

double ObjectState::footprint_radius() const {
  if (is_cylinder()) return std::get<CylinderShape>(shape).radius;
  const auto& b = std::get<BoxShape>(shape);
  return 0.5 * std::hypot(b.width, b.depth);
}

double ObjectState::body_height() const {
  return is_cylinder() ? std::get<CylinderShape>(shape).height
                       : std::get<BoxShape>(shape).height;
}

std::vector<Vec2> footprint_corners(const ObjectState& obj) {
  const auto& b = std::get<BoxShape>(obj.shape);
  const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
  const double hw = b.width / 2, hd = b.depth / 2;
  std::vector<Vec2> out;
  for (const auto [sx, sy] : {std::pair{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}}) {
    const double lx = sx * hw, ly = sy * hd;
    out.push_back({obj.position.x + c * lx - s * ly, obj.position.y + s * lx + c * ly});
  }
  return out;
}

namespace {

// Separating-axis test between two oriented rectangles.
bool rects_overlap(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  auto axes_separate = [](const std::vector<Vec2>& from, const std::vector<Vec2>& p,
                          const std::vector<Vec2>& q) {
    for (size_t i = 0; i < from.size(); ++i) {
      const Vec2 edge = from[(i + 1) % from.size()] - from[i];
      const Vec2 axis{-edge.y, edge.x};
      double pmin = 1e30, pmax = -1e30, qmin = 1e30, qmax = -1e30;
      for (const auto& v : p) {
        const double d = axis.dot(v);
        pmin = std::min(pmin, d);
        pmax = std::max(pmax, d);
      }
      for (const auto& v : q) {
        const double d = axis.dot(v);
        qmin = std::min(qmin, d);
        qmax = std::max(qmax, d);
      }
      if (pmax < qmin || qmax < pmin) return true;
    }
    return false;
  };
  return !axes_separate(a, a, b) && !axes_separate(b, a, b);
}

// Closest point on an oriented rectangle (local frame test) to a point.
Vec2 closest_point_on_rect(const ObjectState& box, Vec2 p) {
  const auto& b = std::get<BoxShape>(box.shape);
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Vec2 rel = p - box.position;
  const double lx = c * rel.x + s * rel.y;
  const double ly = -s * rel.x + c * rel.y;
  const double qx = std::clamp(lx, -b.width / 2, b.width / 2);
  const double qy = std::clamp(ly, -b.depth / 2, b.depth / 2);
  return {box.position.x + c * qx - s * qy, box.position.y + s * qx + c * qy};
}

}  // namespace

bool footprints_overlap(const ObjectState& a, const ObjectState& b) {
  if (a.is_cylinder() && b.is_cylinder()) {
    const double ra = std::get<CylinderShape>(a.shape).radius;
    const double rb = std::get<CylinderShape>(b.shape).radius;
    return (a.position - b.position).norm() < ra + rb;
  }
  if (a.is_cylinder() || b.is_cylinder()) {
    const ObjectState& cyl = a.is_cylinder() ? a : b;
    const ObjectState& box = a.is_cylinder() ? b : a;
    const Vec2 q = closest_point_on_rect(box, cyl.position);
    return (q - cyl.position).norm() < std::get<CylinderShape>(cyl.shape).radius;
  }
  return rects_overlap(footprint_corners(a), footprint_corners(b));
}

const std::vector<Vec3>& object_color_palette() {
  static const std::vector<Vec3> palette = {
      {0.15, 0.35, 0.95},  // blue
      {0.95, 0.85, 0.10},  // yellow
      {0.15, 0.80, 0.25},  // green
      {0.85, 0.20, 0.85},  // magenta
      {0.10, 0.85, 0.85},  // cyan
      {0.95, 0.55, 0.10},  // orange
      {0.55, 0.30, 0.90},  // violet
      {0.60, 0.78, 0.20},  // lime
  };
  return palette;
}

SceneState sample_scene(Rng& rng, int n_objects, const SceneSampleParams& params) {
  check(n_objects >= 1, "sample_scene: need at least one object");
  SceneState scene;
  const Aabb& ws = params.workspace;
  auto sample_position = [&](double radius) {
    return Vec2{rng.uniform(ws.lo.x + radius + params.margin, ws.hi.x - radius - params.margin),
                rng.uniform(ws.lo.y + radius + params.margin, ws.hi.y - radius - params.margin)};
  };

  const auto& palette = object_color_palette();
  std::vector<int> color_order(palette.size());
  for (size_t i = 0; i < palette.size(); ++i) color_order[i] = int(i);
  rng.shuffle(color_order);

  int rejections = 0;
  for (int j = 0; j < n_objects; ++j) {
    ObjectState obj;
    obj.color = palette[color_order[j % palette.size()]];
    while (true) {
      BoxShape b;
      b.width = rng.uniform(params.box_min_side, params.box_max_side);
      b.depth = rng.uniform(params.box_min_side, params.box_max_side);
      b.height = rng.uniform(params.box_min_height, params.box_max_height);
      obj.shape = b;
      obj.yaw = rng.uniform(0, 2 * M_PI);
      obj.position = sample_position(obj.footprint_radius());
      bool ok = true;
      for (const auto& other : scene.objects)
        if (footprints_overlap(obj, other)) ok = false;
      if (ok) break;
      if (++rejections > params.max_rejections)
        fail("sample_scene: workspace too crowded after " +
             std::to_string(params.max_rejections) + " rejections");
    }
    scene.objects.push_back(obj);
  }

  ObjectState pusher;
  pusher.shape = CylinderShape{params.pusher_radius, params.pusher_height};
  pusher.color = {0.9, 0.1, 0.1};  // the articulated pusher is red
  while (true) {
    pusher.position = sample_position(params.pusher_radius);
    bool ok = true;
    for (const auto& other : scene.objects)
      if (footprints_overlap(pusher, other)) ok = false;
    if (ok) break;
    if (++rejections > params.max_rejections)
      fail("sample_scene: no free pusher location after " +
           std::to_string(params.max_rejections) + " rejections");
  }
  scene.objects.push_back(pusher);
  scene.pusher_index = int(scene.objects.size()) - 1;
  return scene;
}

}  // namespace compnerf::scene
