#pragma once

#include "compnerf/harness/checkpoint.hpp"

namespace compnerf::harness {

struct LatentCache {
  std::vector<dynamics::LatentTrajectory> trajectories;
};

// Encodes every frame once with frozen weights and precomputes the
// per-transition adjacency (once-per-step mode, dilated, estimated from the
// latent set with the articulated latent substituted by its t+1 encoding).
LatentCache encode_dataset(const Model& model, const std::vector<scene::Trajectory>& dataset,
                           const std::function<void(size_t, size_t)>& progress = {});

// Bit-exact round trip.
void save_latent_cache(const std::string& path, const LatentCache& cache);
LatentCache load_latent_cache(const std::string& path);

struct GnnTrainOptions {
  int iterations = 0;           // 0 = config default
  std::string checkpoint_path;  // full model checkpoint (AE + GNN blocks)
};

dynamics::GnnTrainReport train_dynamics(Model& model, const LatentCache& cache,
                                        const GnnTrainOptions& opts, Rng& rng,
                                        const std::function<void(int, double)>& on_iteration = {});

struct OneStepEval {
  double model_mse = 0;  // one-step latent MSE of the trained GNN
  double copy_mse = 0;   // copy-last-latent baseline on the same encodings
  int transitions = 0;
};

OneStepEval evaluate_one_step(const Model& model, const LatentCache& cache);

}  // namespace compnerf::harness
