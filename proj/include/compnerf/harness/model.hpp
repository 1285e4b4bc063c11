#pragma once

#include "compnerf/dynamics/rollout.hpp"
#include "compnerf/harness/config.hpp"

namespace compnerf::harness {

// All learned components plus the shared grid, built from one Config.
struct Model {
  Config config;
  encoder::WorkspaceGrid grid;
  encoder::ObjectEncoder omega;
  decoder::NerfField field;
  dynamics::GraphNets nets;

  NamedParams ae_params() const;
  NamedParams gnn_params() const;
  NamedParams all_params() const;

  dynamics::ForwardModel forward_model() const;
  dynamics::ForwardModel forward_model(const dynamics::DynamicsConfig& dyn) const;
};

Model build_model(const Config& cfg, Rng& init_rng);

// Observation plumbing shared by the trainers, evaluation and the CLI.
Tensor image_to_tensor(const io::ImageU8& img);  // -> [3,H,W] in [0,1]
std::vector<encoder::PosedView> make_posed_views(const scene::Trajectory& traj, size_t frame);

}  // namespace compnerf::harness
