#pragma once

#include "compnerf/harness/checkpoint.hpp"

namespace compnerf::harness {

struct AeTrainOptions {
  int iterations = 0;           // 0 = config default
  std::string checkpoint_path;  // written every checkpoint_every and at the end
  std::string loss_csv_path;    // "iteration,loss" log
  bool resume = false;          // continue from checkpoint_path
};

struct AeTrainReport {
  std::vector<std::pair<int, double>> losses;  // (iteration, loss)
  int empty_pixel_sets = 0;
  int iterations_run = 0;
};

// Per iteration: random scene, frame and view; masked-ray reconstruction
// loss through the encoder and decoder; ADAM update. The checkpoint stores
// the RNG state, so resumed training replays the exact stream.
AeTrainReport train_autoencoder(Model& model, const std::vector<scene::Trajectory>& dataset,
                                const AeTrainOptions& opts, Rng& rng,
                                const std::function<void(int, double)>& on_iteration = {});

}  // namespace compnerf::harness
