#include "compnerf/harness/model.hpp"

namespace compnerf::harness {

NamedParams Model::ae_params() const {
  NamedParams out;
  omega.collect(out);
  field.collect(out);
  return out;
}

NamedParams Model::gnn_params() const {
  NamedParams out;
  nets.collect(out);
  return out;
}

NamedParams Model::all_params() const {
  NamedParams out = ae_params();
  for (auto& p : gnn_params()) out.push_back(p);
  return out;
}

dynamics::ForwardModel Model::forward_model() const {
  return forward_model(config.dynamics_config());
}

dynamics::ForwardModel Model::forward_model(const dynamics::DynamicsConfig& dyn) const {
  dynamics::ForwardModel fm;
  fm.omega = &omega;
  fm.field = &field;
  fm.nets = &nets;
  fm.grid = &grid;
  fm.dynamics = dyn;
  return fm;
}

Model build_model(const Config& cfg, Rng& init_rng) {
  Model m;
  m.config = cfg;
  m.grid = encoder::make_grid(cfg.workspace(), cfg.grid_depth, cfg.grid_rows, cfg.grid_cols);
  m.omega = encoder::make_object_encoder(cfg.encoder_config(), m.grid, init_rng);
  m.field = decoder::make_nerf_field(cfg.nerf_config(), cfg.workspace(), init_rng);
  m.nets = dynamics::make_graph_nets(cfg.latent_dim, cfg.gnn_hidden, cfg.edge_dim, init_rng);
  return m;
}

Tensor image_to_tensor(const io::ImageU8& img) {
  check(img.channels == 3, "image_to_tensor: expects RGB");
  const int64_t plane = int64_t(img.width) * img.height;
  std::vector<real> data(3 * plane);
  for (int64_t p = 0; p < plane; ++p)
    for (int ch = 0; ch < 3; ++ch)
      data[ch * plane + p] = real(img.pixels[p * 3 + ch]) / real(255);
  return Tensor::from({3, img.height, img.width}, std::move(data));
}

std::vector<encoder::PosedView> make_posed_views(const scene::Trajectory& traj, size_t frame) {
  check(frame < traj.frames.size(), "make_posed_views: frame index out of range");
  std::vector<encoder::PosedView> views;
  const auto& fd = traj.frames[frame];
  for (size_t v = 0; v < fd.views.size(); ++v) {
    encoder::PosedView pv;
    pv.image = image_to_tensor(fd.views[v].rgb);
    pv.camera = traj.rig.cameras[v];
    pv.masks = fd.views[v].masks;
    views.push_back(std::move(pv));
  }
  return views;
}

}  // namespace compnerf::harness
