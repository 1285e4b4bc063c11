#pragma once

#include <map>

#include "compnerf/dynamics/gnn.hpp"
#include "compnerf/encoder/encoder.hpp"

namespace compnerf::dynamics {

// Everything the forward-prediction loop needs, borrowed from the owner.
struct ForwardModel {
  const encoder::ObjectEncoder* omega = nullptr;
  const decoder::NerfField* field = nullptr;
  const GraphNets* nets = nullptr;
  const encoder::WorkspaceGrid* grid = nullptr;
  DynamicsConfig dynamics;
};

// Occupancy grids keyed by latent identity; latents that persist across
// steps (quasi-static freeze) are thresholded only once per rollout.
class OccupancyCache {
 public:
  const decoder::OccupancyGrid& get(const ForwardModel& model, const Tensor& z);

 private:
  std::map<const Node*, std::pair<std::shared_ptr<Node>, decoder::OccupancyGrid>> cache_;
};

AdjacencyFn model_adjacency(const ForwardModel& model, OccupancyCache& cache, int dilation);

struct RolloutState {
  std::vector<Tensor> latents;
  RigidTransform cumulative;  // pusher transform accumulated since t=0
};

// Interventions accumulate: the articulated latent at step t is the initial
// observation re-encoded under the composed transform, not a chained
// re-encode of predicted frames.
Tensor intervene(const ForwardModel& model, const std::vector<encoder::PosedView>& initial_views,
                 int articulated, const RigidTransform& cumulative);

RolloutState rollout_step(const ForwardModel& model,
                          const std::vector<encoder::PosedView>& initial_views,
                          int articulated, const RolloutState& state, Vec2 push,
                          OccupancyCache& cache);

// Encodes the initial observation once, then applies intervene + propagate +
// quasi-static per action. Returns T+1 latent sets (index 0 = the encoding).
std::vector<std::vector<Tensor>> forward_predict(
    const ForwardModel& model, const std::vector<encoder::PosedView>& initial_views,
    int articulated, std::span<const Vec2> actions);

}  // namespace compnerf::dynamics
