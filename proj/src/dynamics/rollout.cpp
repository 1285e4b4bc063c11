#include "compnerf/dynamics/rollout.hpp"

namespace compnerf::dynamics {

const decoder::OccupancyGrid& OccupancyCache::get(const ForwardModel& model, const Tensor& z) {
  const Node* key = z.node().get();
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    decoder::OccupancyGrid occ =
        decoder::occupancy(*model.field, z, *model.grid, model.dynamics.kappa);
    it = cache_.emplace(key, std::make_pair(z.node(), std::move(occ))).first;
  }
  return it->second.second;
}

AdjacencyFn model_adjacency(const ForwardModel& model, OccupancyCache& cache, int dilation) {
  return [&model, &cache, dilation](const std::vector<Tensor>& latents) {
    std::vector<decoder::OccupancyGrid> grids;
    grids.reserve(latents.size());
    for (const auto& z : latents) grids.push_back(cache.get(model, z));
    return decoder::adjacency_from_grids(grids, dilation);
  };
}

Tensor intervene(const ForwardModel& model,
                 const std::vector<encoder::PosedView>& initial_views, int articulated,
                 const RigidTransform& cumulative) {
  return model.omega->encode_object_transformed(initial_views, articulated, *model.grid,
                                                cumulative);
}

RolloutState rollout_step(const ForwardModel& model,
                          const std::vector<encoder::PosedView>& initial_views,
                          int articulated, const RolloutState& state, Vec2 push,
                          OccupancyCache& cache) {
  RolloutState next;
  next.cumulative = state.cumulative.compose(RigidTransform::from_planar(push));
  std::vector<Tensor> z = state.latents;
  z[articulated] = intervene(model, initial_views, articulated, next.cumulative);

  AdjacencyFn adjacency;
  switch (model.dynamics.adjacency_mode) {
    case AdjacencyMode::kDense:
      adjacency = dense_adjacency(z.size());
      break;
    case AdjacencyMode::kOncePerStep:
      adjacency = model_adjacency(model, cache, model.dynamics.dilation_once);
      break;
    case AdjacencyMode::kInLoop:
      adjacency = model_adjacency(model, cache, model.dynamics.dilation_in_loop);
      break;
  }
  PropagateResult res = propagate(*model.nets, z, articulated, model.dynamics, adjacency);
  next.latents = std::move(res.latents);
  return next;
}

std::vector<std::vector<Tensor>> forward_predict(
    const ForwardModel& model, const std::vector<encoder::PosedView>& initial_views,
    int articulated, std::span<const Vec2> actions) {
  std::vector<std::vector<Tensor>> out;
  RolloutState state;
  state.latents = model.omega->encode_scene(initial_views, *model.grid);
  check(articulated >= 0 && size_t(articulated) < state.latents.size(),
        "forward_predict: articulated index out of range");
  out.push_back(state.latents);
  OccupancyCache cache;
  for (const Vec2& q : actions) {
    state = rollout_step(model, initial_views, articulated, state, q, cache);
    out.push_back(state.latents);
  }
  return out;
}

}  // namespace compnerf::dynamics
