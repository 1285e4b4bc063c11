#pragma once

#include <string>

#include "compnerf/decoder/render.hpp"
#include "compnerf/dynamics/gnn.hpp"
#include "compnerf/planner/planner.hpp"
#include "compnerf/scene/dataset.hpp"

namespace compnerf::harness {

// Flat key = value configuration covering every exposed knob, with the
// paper-architecture values as defaults. Unknown keys are rejected.
struct Config {
  // workspace and voxel grid
  double workspace_min_x = -0.2, workspace_min_y = -0.2, workspace_min_z = 0.0;
  double workspace_max_x = 0.2, workspace_max_y = 0.2, workspace_max_z = 0.1;
  int64_t grid_depth = 10, grid_rows = 40, grid_cols = 40;

  // observations
  int image_width = 64, image_height = 48;
  int views = 4;

  // object encoder
  int64_t feature_dim = 64;   // n_o
  int64_t latent_dim = 64;    // k
  int64_t coord_feat = 32;
  int64_t encoder_hidden = 128;
  int64_t phi_channels = 128;
  int64_t phi_dense = 300;
  int64_t voxel_chunk = 8192;

  // NeRF decoder
  int64_t lift_dim = 64;
  int64_t nerf_hidden = 300;
  int64_t nerf_layers = 3;
  int fourier_bands = 0;
  double color_eps = 1e-8;
  int n_samples = 64;
  int mask_dilation_px = 4;

  // density queries
  double kappa = 5.0;
  int dilation_once = 2;
  int dilation_in_loop = 0;

  // GNN dynamics
  int64_t gnn_hidden = 256;
  int64_t edge_dim = 256;
  int64_t message_passes = 3;
  std::string adjacency_mode = "in_loop";
  bool quasi_static = true;

  // training
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
  int ray_budget = 1024;
  int ae_iterations = 20000;
  int gnn_iterations = 10000;
  int gnn_batch = 16;
  int checkpoint_every = 1000;
  int log_every = 50;

  // scene generation
  double push_step = 0.02;
  double direction_noise = 0.2;
  int max_frames = 28;
  int min_frames = 4;

  // planner
  double p_goal = 0.3;
  double p_contact = 0.4;
  double contact_offset = 0.05;
  int mpc_candidates = 32;
  int mpc_horizon = 5;
  double replan_threshold = 0.04;

  int threads = 0;  // 0 = hardware default; 1 = deterministic serial mode

  void apply(const std::string& key, const std::string& value);
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text);
  std::string serialize() const;

  Aabb workspace() const {
    return {{workspace_min_x, workspace_min_y, workspace_min_z},
            {workspace_max_x, workspace_max_y, workspace_max_z}};
  }
  encoder::EncoderConfig encoder_config() const;
  decoder::NerfConfig nerf_config() const;
  decoder::RenderConfig render_config(bool stratified) const;
  dynamics::DynamicsConfig dynamics_config() const;
  planner::PlannerConfig planner_config() const;
  planner::MpcConfig mpc_config() const;
  scene::DatasetParams dataset_params() const;
};

}  // namespace compnerf::harness
