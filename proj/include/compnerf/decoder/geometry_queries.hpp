#pragma once

#include "compnerf/decoder/nerf.hpp"
#include "compnerf/encoder/workspace_grid.hpp"

namespace compnerf::decoder {

// Density-derived geometric queries on the learned fields. All of these are
// pure given frozen weights and never touch ground truth.

struct OccupancyGrid {
  int64_t depth = 0, rows = 0, cols = 0;
  double kappa = 0;
  std::vector<uint8_t> cells;  // depth-major, {0,1}

  int64_t count() const;
};

class VanishedObjectError : public Error {
 public:
  explicit VanishedObjectError(const std::string& msg) : Error(msg) {}
};

// Voxel true iff sigma(center, z) > kappa.
OccupancyGrid occupancy(const NerfField& field, const Tensor& z,
                        const encoder::WorkspaceGrid& grid, double kappa);

// Cubic all-ones dilation by `half_width` voxels.
OccupancyGrid dilate(const OccupancyGrid& occ, int half_width);

bool grids_intersect(const OccupancyGrid& a, const OccupancyGrid& b);

using AdjacencyMatrix = std::vector<uint8_t>;  // m*m, symmetric, zero diagonal

// A_ij = 1 iff the dilated occupancy grids of i and j share a voxel.
AdjacencyMatrix collision_adjacency(const NerfField& field, const std::vector<Tensor>& latents,
                                    const encoder::WorkspaceGrid& grid, double kappa,
                                    int dilation_voxels);
AdjacencyMatrix adjacency_from_grids(const std::vector<OccupancyGrid>& grids,
                                     int dilation_voxels);

// Indicator-weighted mean of voxel centers (homogeneous density assumption).
// Throws VanishedObjectError when no voxel exceeds kappa.
Vec3 center_of_mass(const NerfField& field, const Tensor& z,
                    const encoder::WorkspaceGrid& grid, double kappa);
Vec3 center_of_mass(const OccupancyGrid& occ, const encoder::WorkspaceGrid& grid);

// Mean decoded color over occupied voxels (used for goal/object assignment).
Vec3 mean_decoded_color(const NerfField& field, const Tensor& z,
                        const encoder::WorkspaceGrid& grid, double kappa);

}  // namespace compnerf::decoder
