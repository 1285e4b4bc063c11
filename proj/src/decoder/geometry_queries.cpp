#include "compnerf/decoder/geometry_queries.hpp"

#include <algorithm>

namespace compnerf::decoder {

int64_t OccupancyGrid::count() const {
  int64_t n = 0;
  for (const uint8_t c : cells) n += c;
  return n;
}

OccupancyGrid occupancy(const NerfField& field, const Tensor& z,
                        const encoder::WorkspaceGrid& grid, double kappa) {
  check(kappa >= 0, "occupancy: kappa must be non-negative");
  OccupancyGrid occ;
  occ.depth = grid.depth;
  occ.rows = grid.rows;
  occ.cols = grid.cols;
  occ.kappa = kappa;
  occ.cells.resize(grid.size());
  const RadianceBatch rb = field.eval_points(grid.centers, z);
  const auto sigma = rb.sigma.data();
  for (int64_t i = 0; i < grid.size(); ++i) occ.cells[i] = double(sigma[i]) > kappa ? 1 : 0;
  return occ;
}

OccupancyGrid dilate(const OccupancyGrid& occ, int half_width) {
  if (half_width <= 0) return occ;
  OccupancyGrid out = occ;
  std::fill(out.cells.begin(), out.cells.end(), 0);
  for (int64_t z = 0; z < occ.depth; ++z)
    for (int64_t y = 0; y < occ.rows; ++y)
      for (int64_t x = 0; x < occ.cols; ++x) {
        if (!occ.cells[(z * occ.rows + y) * occ.cols + x]) continue;
        const int64_t z0 = std::max<int64_t>(0, z - half_width);
        const int64_t z1 = std::min<int64_t>(occ.depth - 1, z + half_width);
        const int64_t y0 = std::max<int64_t>(0, y - half_width);
        const int64_t y1 = std::min<int64_t>(occ.rows - 1, y + half_width);
        const int64_t x0 = std::max<int64_t>(0, x - half_width);
        const int64_t x1 = std::min<int64_t>(occ.cols - 1, x + half_width);
        for (int64_t zz = z0; zz <= z1; ++zz)
          for (int64_t yy = y0; yy <= y1; ++yy)
            for (int64_t xx = x0; xx <= x1; ++xx)
              out.cells[(zz * occ.rows + yy) * occ.cols + xx] = 1;
      }
  return out;
}

bool grids_intersect(const OccupancyGrid& a, const OccupancyGrid& b) {
  check(a.cells.size() == b.cells.size(), "grids_intersect: extent mismatch");
  for (size_t i = 0; i < a.cells.size(); ++i)
    if (a.cells[i] && b.cells[i]) return true;
  return false;
}

AdjacencyMatrix adjacency_from_grids(const std::vector<OccupancyGrid>& grids,
                                     int dilation_voxels) {
  const size_t m = grids.size();
  std::vector<OccupancyGrid> dilated;
  dilated.reserve(m);
  for (const auto& g : grids) dilated.push_back(dilate(g, dilation_voxels));
  AdjacencyMatrix a(m * m, 0);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i + 1; j < m; ++j) {
      const uint8_t hit = grids_intersect(dilated[i], dilated[j]) ? 1 : 0;
      a[i * m + j] = hit;
      a[j * m + i] = hit;
    }
  return a;
}

AdjacencyMatrix collision_adjacency(const NerfField& field, const std::vector<Tensor>& latents,
                                    const encoder::WorkspaceGrid& grid, double kappa,
                                    int dilation_voxels) {
  std::vector<OccupancyGrid> grids;
  grids.reserve(latents.size());
  for (const auto& z : latents) grids.push_back(occupancy(field, z, grid, kappa));
  return adjacency_from_grids(grids, dilation_voxels);
}

Vec3 center_of_mass(const OccupancyGrid& occ, const encoder::WorkspaceGrid& grid) {
  check(occ.cells.size() == size_t(grid.size()), "center_of_mass: grid extent mismatch");
  Vec3 acc{0, 0, 0};
  int64_t n = 0;
  for (int64_t i = 0; i < grid.size(); ++i) {
    if (!occ.cells[i]) continue;
    acc = acc + grid.centers[i];
    n += 1;
  }
  if (n == 0)
    throw VanishedObjectError("center_of_mass: no voxel density exceeds kappa=" +
                              std::to_string(occ.kappa) + " (object vanished)");
  return acc * (1.0 / double(n));
}

Vec3 center_of_mass(const NerfField& field, const Tensor& z,
                    const encoder::WorkspaceGrid& grid, double kappa) {
  return center_of_mass(occupancy(field, z, grid, kappa), grid);
}

Vec3 mean_decoded_color(const NerfField& field, const Tensor& z,
                        const encoder::WorkspaceGrid& grid, double kappa) {
  const RadianceBatch rb = field.eval_points(grid.centers, z);
  const auto sigma = rb.sigma.data();
  const auto color = rb.color.data();
  Vec3 acc{0, 0, 0};
  int64_t n = 0;
  for (int64_t i = 0; i < grid.size(); ++i) {
    if (double(sigma[i]) <= kappa) continue;
    acc = acc + Vec3{double(color[i * 3]), double(color[i * 3 + 1]), double(color[i * 3 + 2])};
    n += 1;
  }
  if (n == 0)
    throw VanishedObjectError("mean_decoded_color: no voxel density exceeds kappa=" +
                              std::to_string(kappa));
  return acc * (1.0 / double(n));
}

}  // namespace compnerf::decoder
