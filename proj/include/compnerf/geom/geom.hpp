#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "compnerf/core/types.hpp"

namespace compnerf {

struct Vec2 {
  double x = 0, y = 0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(Vec3 o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0 ? Vec3{x / n, y / n, z / n} : Vec3{0, 0, 0};
  }
  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

struct Mat3 {
  // row-major
  std::array<double, 9> a{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 operator*(Vec3 v) const {
    return {a[0] * v.x + a[1] * v.y + a[2] * v.z, a[3] * v.x + a[4] * v.y + a[5] * v.z,
            a[6] * v.x + a[7] * v.y + a[8] * v.z};
  }
  Mat3 transposed() const {
    return {{a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]}};
  }
};

struct Quat {
  double w = 1, x = 0, y = 0, z = 0;
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Quat normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }
  Mat3 to_matrix() const;
  Quat operator*(const Quat& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z, w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x, w * o.z + x * o.y - y * o.x + z * o.w};
  }
  static Quat from_yaw(double yaw) { return {std::cos(yaw / 2), 0, 0, std::sin(yaw / 2)}; }
};

// q in R^7: translation + unit quaternion. Acts on points as R(q) x + s(q).
struct RigidTransform {
  Vec3 translation;
  Quat rotation;

  static RigidTransform identity() { return {}; }
  static RigidTransform from_planar(Vec2 d) { return {{d.x, d.y, 0}, Quat{}}; }

  Vec3 apply(Vec3 p) const { return rotation.to_matrix() * p + translation; }
  // Pull-back used for transforming implicit functions: R^T (p - s).
  Vec3 pullback(Vec3 p) const { return rotation.to_matrix().transposed() * (p - translation); }
  RigidTransform compose(const RigidTransform& then) const;
  bool is_unit(double tol = 1e-6) const { return std::abs(rotation.norm() - 1.0) <= tol; }
};

struct Aabb {
  Vec3 lo, hi;
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  bool contains(Vec3 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
           p.z <= hi.z;
  }
  double diagonal() const { return extent().norm(); }
};

// Slab intersection of a ray with an axis-aligned box. Returns the entry and
// exit parameters clipped to t >= 0, or nothing on a miss.
std::optional<std::pair<double, double>> ray_aabb(Vec3 origin, Vec3 dir, const Aabb& box);

struct CamCoord {
  double u = 0, v = 0;  // pixel coordinates; pixel (x,y) sits at (x,y)
  double d = 0;         // depth along the optical axis, meters
};

// 3x4 projection matrix (intrinsics * extrinsics), row-major. The third row
// is normalized so that the homogeneous scale equals the optical-axis depth.
struct Camera {
  std::array<double, 12> k{};
  int width = 0, height = 0;

  CamCoord project(Vec3 p) const {
    const double a = k[0] * p.x + k[1] * p.y + k[2] * p.z + k[3];
    const double b = k[4] * p.x + k[5] * p.y + k[6] * p.z + k[7];
    const double c = k[8] * p.x + k[9] * p.y + k[10] * p.z + k[11];
    return {a / c, b / c, c};
  }
  Vec3 center() const;                    // camera origin in world coordinates
  Vec3 pixel_ray_dir(double u, double v) const;  // unit direction through (u,v)
  bool in_image(const CamCoord& cc) const {
    return cc.d > 0 && cc.u >= -0.5 && cc.u < width - 0.5 && cc.v >= -0.5 &&
           cc.v < height - 0.5;
  }
};

Camera make_lookat_camera(Vec3 position, Vec3 target, double fx, double fy, int width,
                          int height);

}  // namespace compnerf
