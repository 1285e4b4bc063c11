#include "compnerf/scene/push_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace compnerf::scene {

namespace {

struct Mtv {
  Vec2 dir;      // unit, direction the mover should translate
  double depth;  // penetration depth
  Vec2 contact;  // approximate contact point (world)
};

Vec2 rect_closest_point(const ObjectState& box, Vec2 p) {
  const auto& b = std::get<BoxShape>(box.shape);
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  const Vec2 rel = p - box.position;
  const double lx = c * rel.x + s * rel.y;
  const double ly = -s * rel.x + c * rel.y;
  const double qx = std::clamp(lx, -b.width / 2, b.width / 2);
  const double qy = std::clamp(ly, -b.depth / 2, b.depth / 2);
  return {box.position.x + c * qx - s * qy, box.position.y + s * qx + c * qy};
}

// Minimal translation separating `mover` from `other`; empty depth<=0 if
// the footprints are already separate.
Mtv compute_mtv(const ObjectState& mover, const ObjectState& other) {
  if (mover.is_cylinder() || other.is_cylinder()) {
    const bool mover_is_cyl = mover.is_cylinder();
    if (mover.is_cylinder() && other.is_cylinder()) {
      const double ra = std::get<CylinderShape>(mover.shape).radius;
      const double rb = std::get<CylinderShape>(other.shape).radius;
      const Vec2 d = mover.position - other.position;
      const double dist = d.norm();
      const Vec2 dir = dist > 1e-12 ? d * (1.0 / dist) : Vec2{1, 0};
      return {dir, ra + rb - dist, other.position + dir * rb};
    }
    const ObjectState& cyl = mover_is_cyl ? mover : other;
    const ObjectState& box = mover_is_cyl ? other : mover;
    const double r = std::get<CylinderShape>(cyl.shape).radius;
    const Vec2 q = rect_closest_point(box, cyl.position);
    const Vec2 d = cyl.position - q;
    const double dist = d.norm();
    if (dist > 1e-12) {
      // Circle center outside the box: push along center-to-surface.
      const Vec2 away_from_box = d * (1.0 / dist);
      const double depth = r - dist;
      const Vec2 dir = mover_is_cyl ? away_from_box : away_from_box * -1.0;
      return {dir, depth, q};
    }
    // Center inside the box: exit through the nearest face.
    const auto& b = std::get<BoxShape>(box.shape);
    const double c = std::cos(box.yaw), s = std::sin(box.yaw);
    const Vec2 rel = cyl.position - box.position;
    const double lx = c * rel.x + s * rel.y;
    const double ly = -s * rel.x + c * rel.y;
    const double ex = b.width / 2 - std::abs(lx);
    const double ey = b.depth / 2 - std::abs(ly);
    Vec2 local_dir = ex < ey ? Vec2{lx >= 0 ? 1.0 : -1.0, 0.0} : Vec2{0.0, ly >= 0 ? 1.0 : -1.0};
    const Vec2 away_from_box{c * local_dir.x - s * local_dir.y,
                             s * local_dir.x + c * local_dir.y};
    const double depth = std::min(ex, ey) + r;
    return {mover_is_cyl ? away_from_box : away_from_box * -1.0, depth, cyl.position};
  }

  // Box-box separating axis with minimal overlap.
  const auto ca = footprint_corners(mover);
  const auto cb = footprint_corners(other);
  double best_overlap = 1e30;
  Vec2 best_axis{1, 0};
  auto consider_axes = [&](const std::vector<Vec2>& from) {
    for (size_t i = 0; i < from.size(); ++i) {
      const Vec2 edge = from[(i + 1) % from.size()] - from[i];
      Vec2 axis = Vec2{-edge.y, edge.x}.normalized();
      double amin = 1e30, amax = -1e30, bmin = 1e30, bmax = -1e30;
      for (const auto& v : ca) {
        const double p = axis.dot(v);
        amin = std::min(amin, p);
        amax = std::max(amax, p);
      }
      for (const auto& v : cb) {
        const double p = axis.dot(v);
        bmin = std::min(bmin, p);
        bmax = std::max(bmax, p);
      }
      const double overlap = std::min(amax, bmax) - std::max(amin, bmin);
      if (overlap < best_overlap) {
        best_overlap = overlap;
        best_axis = axis;
      }
    }
  };
  consider_axes(ca);
  consider_axes(cb);
  if (best_axis.dot(mover.position - other.position) < 0) best_axis = best_axis * -1.0;
  const Vec2 contact = rect_closest_point(mover, other.position);
  return {best_axis, best_overlap, contact};
}

}  // namespace

PushResult step_push_oracle(const SceneState& scene, Vec2 displacement,
                            const PushParams& params) {
  PushResult out;
  out.state = scene;
  auto& objects = out.state.objects;
  const int pusher = out.state.pusher_index;

  auto clamp_to_workspace = [&](ObjectState& obj) {
    const double r = obj.footprint_radius();
    const double x0 = params.workspace.lo.x + r, x1 = params.workspace.hi.x - r;
    const double y0 = params.workspace.lo.y + r, y1 = params.workspace.hi.y - r;
    const Vec2 before = obj.position;
    obj.position.x = std::clamp(obj.position.x, x0, x1);
    obj.position.y = std::clamp(obj.position.y, y0, y1);
    return (obj.position - before).norm() > 1e-12;
  };

  objects[pusher].position = objects[pusher].position + displacement;
  clamp_to_workspace(objects[pusher]);

  std::vector<bool> moved(objects.size(), false);
  moved[pusher] = true;
  const Vec2 pusher_pos = objects[pusher].position;

  for (int pass = 0; pass < params.max_passes; ++pass) {
    bool changed = false;
    for (size_t i = 0; i < objects.size(); ++i) {
      for (size_t j = i + 1; j < objects.size(); ++j) {
        if (!footprints_overlap(objects[i], objects[j])) continue;
        // Project the partner of an already-moved object; if ambiguous,
        // the one farther from the pusher yields.
        size_t mover;
        if (moved[i] != moved[j]) {
          mover = moved[i] ? j : i;
        } else {
          const double di = (objects[i].position - pusher_pos).norm();
          const double dj = (objects[j].position - pusher_pos).norm();
          mover = di >= dj ? i : j;
        }
        if (int(mover) == pusher) mover = (mover == i) ? j : i;
        const size_t pushee = (mover == i) ? j : i;
        const Mtv mtv = compute_mtv(objects[mover], objects[pushee]);
        if (mtv.depth <= 0) continue;
        ObjectState& m = objects[mover];
        m.position = m.position + mtv.dir * (mtv.depth + params.slack);
        if (!m.is_cylinder()) {
          const Vec2 lever = mtv.contact - m.position;
          const double torque = lever.cross(mtv.dir);
          m.yaw += params.rot_gain * (mtv.depth + params.slack) * torque /
                   (lever.dot(lever) + 1e-4);
        }
        if (clamp_to_workspace(m) && int(mover) != pusher) out.object_clamped = true;
        moved[mover] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return out;
}

}  // namespace compnerf::scene
