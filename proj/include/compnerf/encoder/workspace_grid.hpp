#pragma once

#include <vector>

#include "compnerf/geom/geom.hpp"

namespace compnerf::encoder {

// Axis-aligned workspace box and its voxel discretization. Voxel centers are
// laid out depth-major: index = (iz * rows + iy) * cols + ix, with z the
// depth axis. All objects share the same grid.
struct WorkspaceGrid {
  Aabb box;
  int64_t depth = 0, rows = 0, cols = 0;  // z, y, x extents
  std::vector<Vec3> centers;

  int64_t size() const { return depth * rows * cols; }
  Vec3 cell() const {
    const Vec3 e = box.extent();
    return {e.x / double(cols), e.y / double(rows), e.z / double(depth)};
  }
  int64_t index(int64_t iz, int64_t iy, int64_t ix) const {
    return (iz * rows + iy) * cols + ix;
  }
};

WorkspaceGrid make_grid(const Aabb& box, int64_t depth, int64_t rows, int64_t cols);

}  // namespace compnerf::encoder
