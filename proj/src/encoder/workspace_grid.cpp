#include "compnerf/encoder/workspace_grid.hpp"

namespace compnerf::encoder {

WorkspaceGrid make_grid(const Aabb& box, int64_t depth, int64_t rows, int64_t cols) {
  check(depth >= 1 && rows >= 1 && cols >= 1, "make_grid: extents must be positive");
  WorkspaceGrid g;
  g.box = box;
  g.depth = depth;
  g.rows = rows;
  g.cols = cols;
  const Vec3 e = box.extent();
  const double dz = e.z / double(depth), dy = e.y / double(rows), dx = e.x / double(cols);
  g.centers.reserve(g.size());
  for (int64_t iz = 0; iz < depth; ++iz)
    for (int64_t iy = 0; iy < rows; ++iy)
      for (int64_t ix = 0; ix < cols; ++ix)
        g.centers.push_back({box.lo.x + (double(ix) + 0.5) * dx,
                             box.lo.y + (double(iy) + 0.5) * dy,
                             box.lo.z + (double(iz) + 0.5) * dz});
  return g;
}

}  // namespace compnerf::encoder
