#include "compnerf/harness/train_ae.hpp"

#include <fstream>

namespace compnerf::harness {

namespace {

void write_loss_csv(const std::string& path,
                    const std::vector<std::pair<int, double>>& losses) {
  if (path.empty()) return;
  std::ofstream out(path);
  check(bool(out), "train_ae: cannot write loss log " + path);
  out << "iteration,loss\n";
  out.precision(10);
  for (const auto& [it, loss] : losses) out << it << "," << loss << "\n";
}

}  // namespace

AeTrainReport train_autoencoder(Model& model, const std::vector<scene::Trajectory>& dataset,
                                const AeTrainOptions& opts, Rng& rng,
                                const std::function<void(int, double)>& on_iteration) {
  check(!dataset.empty(), "train_ae: dataset is empty");
  for (const auto& traj : dataset)
    check(!traj.frames.empty() && traj.frames[0].views.size() ==
                                      size_t(model.config.views),
          "train_ae: dataset view count does not match the configured rig");

  AeTrainReport report;
  NamedParams named = model.ae_params();
  std::vector<Tensor> params;
  for (auto& [name, p] : named) params.push_back(p);
  AdamState adam;
  adam.lr = model.config.learning_rate;
  adam.beta1 = model.config.adam_beta1;
  adam.beta2 = model.config.adam_beta2;
  adam.eps = model.config.adam_eps;

  int start_iter = 0;
  if (opts.resume) {
    const Checkpoint ckpt = load_checkpoint(opts.checkpoint_path);
    unpack_params(ckpt, named, &adam);
    rng.load_state(ckpt.rng_state);
    start_iter = int(ckpt.iteration);
  }

  const int iterations = opts.iterations > 0 ? opts.iterations : model.config.ae_iterations;
  const decoder::RenderConfig render_cfg = model.config.render_config(/*stratified=*/true);
  decoder::ReconLossStats loss_stats;

  auto save = [&](int iter) {
    if (opts.checkpoint_path.empty()) return;
    Checkpoint ckpt;
    ckpt.iteration = iter;
    ckpt.config_text = model.config.serialize();
    ckpt.rng_state = rng.save_state();
    pack_params(ckpt, named, &adam);
    save_checkpoint(opts.checkpoint_path, ckpt);
  };

  for (int iter = start_iter; iter < iterations; ++iter) {
    const size_t s = size_t(rng.randint(int64_t(dataset.size())));
    const auto& traj = dataset[s];
    const size_t t = size_t(rng.randint(int64_t(traj.frames.size())));
    const int view = int(rng.randint(int64_t(traj.frames[t].views.size())));

    const std::vector<encoder::PosedView> views = make_posed_views(traj, t);
    zero_grads(params);
    Tape tape;
    double loss_value = 0;
    {
      TapeScope scope(&tape);
      std::vector<Tensor> latents = model.omega.encode_scene(views, model.grid);
      Tensor loss = decoder::recon_loss(model.field, latents, views, view,
                                        model.grid.box, render_cfg,
                                        model.config.ray_budget, rng, &loss_stats);
      loss_value = double(loss.item());
      if (loss.requires_grad()) backward(tape, loss);
    }
    adam_step(params, adam);
    if (iter % model.config.log_every == 0 || iter + 1 == iterations)
      report.losses.emplace_back(iter, loss_value);
    if (on_iteration) on_iteration(iter, loss_value);
    if (model.config.checkpoint_every > 0 && (iter + 1) % model.config.checkpoint_every == 0)
      save(iter + 1);
    report.iterations_run += 1;
  }
  save(iterations);
  report.empty_pixel_sets = loss_stats.empty_pixel_sets;
  write_loss_csv(opts.loss_csv_path, report.losses);
  return report;
}

}  // namespace compnerf::harness
