#pragma once

#include "compnerf/scene/scene.hpp"

namespace compnerf::scene {

struct PushParams {
  double step_size = 0.02;  // one action moves the pusher 2 cm
  double rot_gain = 0.6;
  double slack = 1e-4;   // separation left after a projection
  int max_passes = 10;   // sequential penetration resolution passes
  Aabb workspace{{-0.2, -0.2, 0.0}, {0.2, 0.2, 0.1}};
};

struct PushResult {
  SceneState state;
  bool object_clamped = false;  // a non-pusher object got pinned at the wall
};

// Quasi-static projection dynamics: the pusher translates, penetrated objects
// are projected out along the minimal translation direction with a yaw change
// proportional to the tangential lever arm, then object-object penetrations
// are resolved by sequential projections. Untouched objects are returned
// bit-identical.
PushResult step_push_oracle(const SceneState& scene, Vec2 displacement,
                            const PushParams& params = {});

}  // namespace compnerf::scene
