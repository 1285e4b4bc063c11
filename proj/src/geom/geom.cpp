#include "compnerf/geom/geom.hpp"

#include <algorithm>

namespace compnerf {

Mat3 Quat::to_matrix() const {
  const double ww = w * w, xx = x * x, yy = y * y, zz = z * z;
  const double wx = w * x, wy = w * y, wz = w * z;
  const double xy = x * y, xz = x * z, yz = y * z;
  return {{ww + xx - yy - zz, 2 * (xy - wz), 2 * (xz + wy),
           2 * (xy + wz), ww - xx + yy - zz, 2 * (yz - wx),
           2 * (xz - wy), 2 * (yz + wx), ww - xx - yy + zz}};
}

RigidTransform RigidTransform::compose(const RigidTransform& then) const {
  // (then * this): apply *this first, then `then`.
  RigidTransform out;
  out.rotation = (then.rotation * rotation).normalized();
  out.translation = then.rotation.to_matrix() * translation + then.translation;
  return out;
}

std::optional<std::pair<double, double>> ray_aabb(Vec3 origin, Vec3 dir, const Aabb& box) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
  const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
  for (int i = 0; i < 3; ++i) {
    if (d[i] == 0.0) {
      if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
      continue;
    }
    double ta = (lo[i] - o[i]) / d[i];
    double tb = (hi[i] - o[i]) / d[i];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

namespace {

// Inverse of the 3x3 left block of the projection matrix.
std::array<double, 9> invert3(const std::array<double, 12>& k) {
  const double a = k[0], b = k[1], c = k[2];
  const double d = k[4], e = k[5], f = k[6];
  const double g = k[8], h = k[9], i = k[10];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  check(std::abs(det) > 1e-14, "camera matrix is singular");
  const double inv = 1.0 / det;
  return {(e * i - f * h) * inv, (c * h - b * i) * inv, (b * f - c * e) * inv,
          (f * g - d * i) * inv, (a * i - c * g) * inv, (c * d - a * f) * inv,
          (d * h - e * g) * inv, (b * g - a * h) * inv, (a * e - b * d) * inv};
}

}  // namespace

Vec3 Camera::center() const {
  const auto mi = invert3(k);
  const Vec3 p{k[3], k[7], k[11]};
  return {-(mi[0] * p.x + mi[1] * p.y + mi[2] * p.z),
          -(mi[3] * p.x + mi[4] * p.y + mi[5] * p.z),
          -(mi[6] * p.x + mi[7] * p.y + mi[8] * p.z)};
}

Vec3 Camera::pixel_ray_dir(double u, double v) const {
  const auto mi = invert3(k);
  const Vec3 d{mi[0] * u + mi[1] * v + mi[2], mi[3] * u + mi[4] * v + mi[5],
               mi[6] * u + mi[7] * v + mi[8]};
  return d.normalized();
}

Camera make_lookat_camera(Vec3 position, Vec3 target, double fx, double fy, int width,
                          int height) {
  const Vec3 fwd = (target - position).normalized();
  Vec3 up{0, 0, 1};
  if (std::abs(fwd.dot(up)) > 0.999) up = {0, 1, 0};
  const Vec3 right = fwd.cross(up).normalized();
  const Vec3 down = fwd.cross(right);
  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  // Rows of K = K_int [R | t] with R rows (right, down, fwd), t = -R p.
  auto row = [&](Vec3 r) { return Vec3{r.x, r.y, r.z}; };
  const Vec3 r0 = row(right), r1 = row(down), r2 = row(fwd);
  const Vec3 t{-r0.dot(position), -r1.dot(position), -r2.dot(position)};
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.k = {fx * r0.x + cx * r2.x, fx * r0.y + cx * r2.y, fx * r0.z + cx * r2.z,
           fx * t.x + cx * t.z,
           fy * r1.x + cy * r2.x, fy * r1.y + cy * r2.y, fy * r1.z + cy * r2.z,
           fy * t.y + cy * t.z,
           r2.x, r2.y, r2.z, t.z};
  return cam;
}

}  // namespace compnerf
