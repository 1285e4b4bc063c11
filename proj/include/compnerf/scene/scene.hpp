#pragma once

#include <variant>
#include <vector>

#include "compnerf/core/rng.hpp"
#include "compnerf/geom/geom.hpp"

namespace compnerf::scene {

struct BoxShape {
  double width = 0, depth = 0, height = 0;  // full extents, meters
};

struct CylinderShape {
  double radius = 0, height = 0;
};

struct ObjectState {
  std::variant<BoxShape, CylinderShape> shape;
  Vec2 position;  // planar, meters
  double yaw = 0;
  Vec3 color{0.5, 0.5, 0.5};

  bool is_cylinder() const { return std::holds_alternative<CylinderShape>(shape); }
  double footprint_radius() const;  // circumscribed radius of the footprint
  double body_height() const;
};

struct SceneState {
  std::vector<ObjectState> objects;
  int pusher_index = -1;

  const ObjectState& pusher() const { return objects[pusher_index]; }
  size_t size() const { return objects.size(); }
};

struct SceneSampleParams {
  Aabb workspace{{-0.2, -0.2, 0.0}, {0.2, 0.2, 0.1}};
  double box_min_side = 0.04, box_max_side = 0.075;
  double box_min_height = 0.03, box_max_height = 0.07;
  double pusher_radius = 0.016, pusher_height = 0.05;
  double margin = 0.005;  // wall clearance for initial placement
  int max_rejections = 1000;
};

// 2D footprint helpers shared by sampling and the push oracle.
std::vector<Vec2> footprint_corners(const ObjectState& obj);  // boxes only
bool footprints_overlap(const ObjectState& a, const ObjectState& b);

// n_objects boxes with rejection-sampled non-overlapping footprints, plus one
// red pusher cylinder at a uniformly sampled free spot.
SceneState sample_scene(Rng& rng, int n_objects, const SceneSampleParams& params = {});

const std::vector<Vec3>& object_color_palette();

}  // namespace compnerf::scene
