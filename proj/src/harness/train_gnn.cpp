#include "compnerf/harness/train_gnn.hpp"

#include <fstream>

namespace compnerf::harness {

LatentCache encode_dataset(const Model& model, const std::vector<scene::Trajectory>& dataset,
                           const std::function<void(size_t, size_t)>& progress) {
  LatentCache cache;
  const dynamics::DynamicsConfig dyn = model.config.dynamics_config();
  for (size_t s = 0; s < dataset.size(); ++s) {
    const auto& traj = dataset[s];
    dynamics::LatentTrajectory lt;
    lt.articulated = traj.articulated;
    for (size_t t = 0; t < traj.frames.size(); ++t) {
      const auto views = make_posed_views(traj, t);
      lt.frames.push_back(model.omega.encode_scene(views, model.grid));
    }
    for (size_t t = 0; t + 1 < lt.frames.size(); ++t) {
      std::vector<Tensor> substituted = lt.frames[t];
      substituted[lt.articulated] = lt.frames[t + 1][lt.articulated];
      lt.transition_adjacency.push_back(decoder::collision_adjacency(
          model.field, substituted, model.grid, dyn.kappa, dyn.dilation_once));
    }
    cache.trajectories.push_back(std::move(lt));
    if (progress) progress(s + 1, dataset.size());
  }
  return cache;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  check(bool(in), "latent cache: truncated file");
  return v;
}

}  // namespace

void save_latent_cache(const std::string& path, const LatentCache& cache) {
  std::ofstream out(path, std::ios::binary);
  check(bool(out), "latent cache: cannot write " + path);
  out.write("CNLC", 4);
  write_pod<uint8_t>(out, uint8_t(sizeof(real)));
  write_pod<uint64_t>(out, cache.trajectories.size());
  for (const auto& lt : cache.trajectories) {
    write_pod<int32_t>(out, lt.articulated);
    write_pod<uint64_t>(out, lt.frames.size());
    const uint64_t m = lt.frames.empty() ? 0 : lt.frames[0].size();
    write_pod<uint64_t>(out, m);
    const uint64_t k = m && !lt.frames.empty() ? uint64_t(lt.frames[0][0].size()) : 0;
    write_pod<uint64_t>(out, k);
    for (const auto& frame : lt.frames)
      for (const auto& z : frame)
        out.write(reinterpret_cast<const char*>(z.data().data()),
                  std::streamsize(z.size() * sizeof(real)));
    for (const auto& adj : lt.transition_adjacency)
      out.write(reinterpret_cast<const char*>(adj.data()), std::streamsize(adj.size()));
  }
  check(bool(out), "latent cache: write failure on " + path);
}

LatentCache load_latent_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(bool(in), "latent cache: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  check(bool(in) && std::string(magic, 4) == "CNLC", "latent cache: bad magic in " + path);
  check(read_pod<uint8_t>(in) == sizeof(real),
        "latent cache: scalar width does not match this build");
  LatentCache cache;
  const uint64_t n = read_pod<uint64_t>(in);
  for (uint64_t s = 0; s < n; ++s) {
    dynamics::LatentTrajectory lt;
    lt.articulated = read_pod<int32_t>(in);
    const uint64_t frames = read_pod<uint64_t>(in);
    const uint64_t m = read_pod<uint64_t>(in);
    const uint64_t k = read_pod<uint64_t>(in);
    for (uint64_t t = 0; t < frames; ++t) {
      std::vector<Tensor> frame;
      for (uint64_t j = 0; j < m; ++j) {
        std::vector<real> data(k);
        in.read(reinterpret_cast<char*>(data.data()), std::streamsize(k * sizeof(real)));
        frame.push_back(Tensor::from({int64_t(k)}, std::move(data)));
      }
      lt.frames.push_back(std::move(frame));
    }
    for (uint64_t t = 0; t + 1 < frames; ++t) {
      decoder::AdjacencyMatrix adj(m * m);
      in.read(reinterpret_cast<char*>(adj.data()), std::streamsize(adj.size()));
      lt.transition_adjacency.push_back(std::move(adj));
    }
    check(bool(in), "latent cache: truncated trajectory");
    cache.trajectories.push_back(std::move(lt));
  }
  return cache;
}

dynamics::GnnTrainReport train_dynamics(Model& model, const LatentCache& cache,
                                        const GnnTrainOptions& opts, Rng& rng,
                                        const std::function<void(int, double)>& on_iteration) {
  AdamState adam;
  adam.lr = model.config.learning_rate;
  adam.beta1 = model.config.adam_beta1;
  adam.beta2 = model.config.adam_beta2;
  adam.eps = model.config.adam_eps;
  const int iterations =
      opts.iterations > 0 ? opts.iterations : model.config.gnn_iterations;
  dynamics::GnnTrainReport report = dynamics::train_gnn(
      model.nets, cache.trajectories, model.config.dynamics_config(), adam, iterations,
      model.config.gnn_batch, rng, on_iteration);
  if (!opts.checkpoint_path.empty()) {
    Checkpoint ckpt;
    ckpt.iteration = iterations;
    ckpt.config_text = model.config.serialize();
    ckpt.rng_state = rng.save_state();
    NamedParams all = model.all_params();
    pack_params(ckpt, all, nullptr);
    save_checkpoint(opts.checkpoint_path, ckpt);
  }
  return report;
}

OneStepEval evaluate_one_step(const Model& model, const LatentCache& cache) {
  OneStepEval eval;
  const dynamics::DynamicsConfig cfg = model.config.dynamics_config();
  dynamics::DynamicsConfig train_like = cfg;
  train_like.adjacency_mode = dynamics::AdjacencyMode::kOncePerStep;
  double model_acc = 0, copy_acc = 0;
  int64_t count = 0;
  for (const auto& lt : cache.trajectories) {
    for (size_t t = 0; t + 1 < lt.frames.size(); ++t) {
      std::vector<Tensor> input = lt.frames[t];
      input[lt.articulated] = lt.frames[t + 1][lt.articulated];
      const auto adj = lt.transition_adjacency[t];
      dynamics::PropagateResult pred =
          dynamics::propagate(model.nets, input, lt.articulated, train_like,
                              [&adj](const std::vector<Tensor>&) { return adj; });
      for (size_t j = 0; j < input.size(); ++j) {
        if (int(j) == lt.articulated) continue;
        const auto p = pred.latents[j].data();
        const auto target = lt.frames[t + 1][j].data();
        const auto prev = lt.frames[t][j].data();
        for (int64_t i = 0; i < int64_t(p.size()); ++i) {
          const double dm = double(p[i]) - double(target[i]);
          const double dc = double(prev[i]) - double(target[i]);
          model_acc += dm * dm;
          copy_acc += dc * dc;
          count += 1;
        }
      }
      eval.transitions += 1;
    }
  }
  check(count > 0, "evaluate_one_step: no transitions");
  eval.model_mse = model_acc / double(count);
  eval.copy_mse = copy_acc / double(count);
  return eval;
}

}  // namespace compnerf::harness
