#pragma once

#include <functional>

#include "compnerf/core/adam.hpp"
#include "compnerf/core/nn.hpp"
#include "compnerf/decoder/geometry_queries.hpp"

namespace compnerf::dynamics {

enum class AdjacencyMode { kInLoop, kOncePerStep, kDense };

AdjacencyMode adjacency_mode_from_string(const std::string& s);
std::string to_string(AdjacencyMode m);

struct DynamicsConfig {
  int64_t message_passes = 3;  // L
  AdjacencyMode adjacency_mode = AdjacencyMode::kInLoop;
  bool quasi_static = true;
  double kappa = 5.0;
  int dilation_once = 2;     // occupancy enlargement for once-per-step estimation
  int dilation_in_loop = 0;  // in-loop estimation re-checks every pass
};

// Edge encoder F_e and node propagator F_z.
struct GraphNets {
  MLP edge_net;  // concat(z_i, z_j) -> n_e
  MLP node_net;  // concat(z_i^t, sum of messages) -> k
  int64_t latent_dim = 0;
  int64_t edge_dim = 0;

  Tensor edge_feature(const Tensor& zi, const Tensor& zj) const;  // [k],[k] -> [n_e]
  void collect(NamedParams& out) const;
};

GraphNets make_graph_nets(int64_t latent_dim, int64_t hidden, int64_t edge_dim, Rng& rng);

// Estimates A from the current per-pass latents (injected so this module
// stays independent of any particular density model).
using AdjacencyFn = std::function<decoder::AdjacencyMatrix(const std::vector<Tensor>&)>;

AdjacencyFn dense_adjacency(size_t m);

struct PropagateResult {
  std::vector<Tensor> latents;
  // Per object: 1 iff the adjacency row had an entry at some pass. With
  // quasi-static on, objects with 0 here pass through bit-identically.
  std::vector<uint8_t> interacted;
  std::vector<decoder::AdjacencyMatrix> adjacency_per_pass;
};

// L-pass message passing. `z` must already carry the intervened articulated
// latent; the articulated (frozen) index passes through unchanged, and F_z
// always receives the pre-step latent as its first argument.
PropagateResult propagate(const GraphNets& nets, const std::vector<Tensor>& z,
                          int articulated, const DynamicsConfig& cfg,
                          const AdjacencyFn& adjacency);

// One-step training data: encoded latent frames plus the per-transition
// adjacency, estimated once per step from the substituted latent set.
struct LatentTrajectory {
  std::vector<std::vector<Tensor>> frames;
  int articulated = -1;
  std::vector<decoder::AdjacencyMatrix> transition_adjacency;  // frames-1 entries
};

struct GnnTrainReport {
  std::vector<double> losses;  // per iteration
  int skipped_short = 0;       // trajectories with < 2 frames
};

// One-step MSE over non-articulated latents; the articulated input latent at
// t is replaced by its observed encoding at t+1 (action-free convention).
GnnTrainReport train_gnn(GraphNets& nets, const std::vector<LatentTrajectory>& data,
                         const DynamicsConfig& cfg, AdamState& adam, int iterations,
                         int batch_pairs, Rng& rng,
                         const std::function<void(int, double)>& on_iteration = {});

}  // namespace compnerf::dynamics
