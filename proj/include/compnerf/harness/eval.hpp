#pragma once

#include "compnerf/harness/checkpoint.hpp"

namespace compnerf::harness {

struct EvalRow {
  int step = 0;
  std::string metric;  // masked_mse | relative_mse | com_error
  double mean = 0;
  double stderr_ = 0;
};

struct EvalReport {
  std::string mode;
  std::vector<EvalRow> rows;
  // Per-scene terminal values, kept for trend comparisons across modes.
  std::vector<double> terminal_masked_mse;
  std::vector<double> terminal_com_error;
  int skipped_short = 0;
  std::string config_text;
  std::string build_id;

  double row_mean(int step, const std::string& metric) const;
};

void write_eval_csv(const std::string& path, const std::vector<EvalReport>& reports);

struct EvalOptions {
  int horizon = 20;
  int max_scenes = 0;  // 0 = all
  int eval_n_samples = 0;  // 0 = config default
};

// Encodes frame 0 of each test trajectory, rolls the dynamics forward with
// each mode's config using the recorded pusher displacements, renders every
// predicted step in all views, and reports masked image error against ground
// truth, error relative to per-step re-encoded reconstructions, and COM
// error against ground-truth poses.
std::vector<EvalReport> evaluate_rollouts(const Model& model,
                                          const std::vector<scene::Trajectory>& test_set,
                                          const std::vector<std::string>& mode_names,
                                          const EvalOptions& opts,
                                          const std::function<void(size_t, size_t)>& progress = {});

dynamics::DynamicsConfig mode_config(const Model& model, const std::string& name);

// Step-0 reconstruction error (no dynamics) averaged over scenes; used by
// the compositional-generalization check.
double reconstruction_mse(const Model& model, const std::vector<scene::Trajectory>& scenes,
                          int max_scenes, int eval_n_samples = 0);

// Picks kappa maximizing occupancy IoU against the analytic voxelization of
// a held-out scene (the paper never quantifies kappa).
double calibrate_kappa(const Model& model, const scene::Trajectory& traj,
                       const std::vector<double>& candidates);

// Analytic voxel occupancy of one object, used as ground truth by the
// calibration and the volume checks.
std::vector<uint8_t> analytic_occupancy(const scene::ObjectState& obj,
                                        const encoder::WorkspaceGrid& grid);

}  // namespace compnerf::harness
