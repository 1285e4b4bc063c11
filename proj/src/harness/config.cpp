#include "compnerf/harness/config.hpp"

#include <fstream>
#include <sstream>

namespace compnerf::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  fail("config: expected boolean, got '" + v + "'");
}

}  // namespace

void Config::apply(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  auto d = [&] { return std::stod(v); };
  auto i = [&] { return std::stoll(v); };

  if (key == "workspace_min_x") workspace_min_x = d();
  else if (key == "workspace_min_y") workspace_min_y = d();
  else if (key == "workspace_min_z") workspace_min_z = d();
  else if (key == "workspace_max_x") workspace_max_x = d();
  else if (key == "workspace_max_y") workspace_max_y = d();
  else if (key == "workspace_max_z") workspace_max_z = d();
  else if (key == "grid_depth") grid_depth = i();
  else if (key == "grid_rows") grid_rows = i();
  else if (key == "grid_cols") grid_cols = i();
  else if (key == "image_width") image_width = int(i());
  else if (key == "image_height") image_height = int(i());
  else if (key == "views") views = int(i());
  else if (key == "feature_dim") feature_dim = i();
  else if (key == "latent_dim") latent_dim = i();
  else if (key == "coord_feat") coord_feat = i();
  else if (key == "encoder_hidden") encoder_hidden = i();
  else if (key == "phi_channels") phi_channels = i();
  else if (key == "phi_dense") phi_dense = i();
  else if (key == "voxel_chunk") voxel_chunk = i();
  else if (key == "lift_dim") lift_dim = i();
  else if (key == "nerf_hidden") nerf_hidden = i();
  else if (key == "nerf_layers") nerf_layers = i();
  else if (key == "fourier_bands") fourier_bands = int(i());
  else if (key == "color_eps") color_eps = d();
  else if (key == "n_samples") n_samples = int(i());
  else if (key == "mask_dilation_px") mask_dilation_px = int(i());
  else if (key == "kappa") kappa = d();
  else if (key == "dilation_once") dilation_once = int(i());
  else if (key == "dilation_in_loop") dilation_in_loop = int(i());
  else if (key == "gnn_hidden") gnn_hidden = i();
  else if (key == "edge_dim") edge_dim = i();
  else if (key == "message_passes") message_passes = i();
  else if (key == "adjacency_mode") adjacency_mode = v;
  else if (key == "quasi_static") quasi_static = parse_bool(v);
  else if (key == "learning_rate") learning_rate = d();
  else if (key == "adam_beta1") adam_beta1 = d();
  else if (key == "adam_beta2") adam_beta2 = d();
  else if (key == "adam_eps") adam_eps = d();
  else if (key == "ray_budget") ray_budget = int(i());
  else if (key == "ae_iterations") ae_iterations = int(i());
  else if (key == "gnn_iterations") gnn_iterations = int(i());
  else if (key == "gnn_batch") gnn_batch = int(i());
  else if (key == "checkpoint_every") checkpoint_every = int(i());
  else if (key == "log_every") log_every = int(i());
  else if (key == "push_step") push_step = d();
  else if (key == "direction_noise") direction_noise = d();
  else if (key == "max_frames") max_frames = int(i());
  else if (key == "min_frames") min_frames = int(i());
  else if (key == "p_goal") p_goal = d();
  else if (key == "p_contact") p_contact = d();
  else if (key == "contact_offset") contact_offset = d();
  else if (key == "mpc_candidates") mpc_candidates = int(i());
  else if (key == "mpc_horizon") mpc_horizon = int(i());
  else if (key == "replan_threshold") replan_threshold = d();
  else if (key == "threads") threads = int(i());
  else fail("config: unknown key '" + key + "'");

  // sanity on a few invariants
  dynamics::adjacency_mode_from_string(adjacency_mode);
}

Config Config::from_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    check(eq != std::string::npos,
          "config: line " + std::to_string(lineno) + " is not 'key = value': " + t);
    cfg.apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  check(bool(in), "config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::string Config::serialize() const {
  std::ostringstream o;
  o.precision(17);
  auto w = [&](const char* k, auto v) { o << k << " = " << v << "\n"; };
  w("workspace_min_x", workspace_min_x);
  w("workspace_min_y", workspace_min_y);
  w("workspace_min_z", workspace_min_z);
  w("workspace_max_x", workspace_max_x);
  w("workspace_max_y", workspace_max_y);
  w("workspace_max_z", workspace_max_z);
  w("grid_depth", grid_depth);
  w("grid_rows", grid_rows);
  w("grid_cols", grid_cols);
  w("image_width", image_width);
  w("image_height", image_height);
  w("views", views);
  w("feature_dim", feature_dim);
  w("latent_dim", latent_dim);
  w("coord_feat", coord_feat);
  w("encoder_hidden", encoder_hidden);
  w("phi_channels", phi_channels);
  w("phi_dense", phi_dense);
  w("voxel_chunk", voxel_chunk);
  w("lift_dim", lift_dim);
  w("nerf_hidden", nerf_hidden);
  w("nerf_layers", nerf_layers);
  w("fourier_bands", fourier_bands);
  w("color_eps", color_eps);
  w("n_samples", n_samples);
  w("mask_dilation_px", mask_dilation_px);
  w("kappa", kappa);
  w("dilation_once", dilation_once);
  w("dilation_in_loop", dilation_in_loop);
  w("gnn_hidden", gnn_hidden);
  w("edge_dim", edge_dim);
  w("message_passes", message_passes);
  w("adjacency_mode", adjacency_mode);
  w("quasi_static", quasi_static ? "true" : "false");
  w("learning_rate", learning_rate);
  w("adam_beta1", adam_beta1);
  w("adam_beta2", adam_beta2);
  w("adam_eps", adam_eps);
  w("ray_budget", ray_budget);
  w("ae_iterations", ae_iterations);
  w("gnn_iterations", gnn_iterations);
  w("gnn_batch", gnn_batch);
  w("checkpoint_every", checkpoint_every);
  w("log_every", log_every);
  w("push_step", push_step);
  w("direction_noise", direction_noise);
  w("max_frames", max_frames);
  w("min_frames", min_frames);
  w("p_goal", p_goal);
  w("p_contact", p_contact);
  w("contact_offset", contact_offset);
  w("mpc_candidates", mpc_candidates);
  w("mpc_horizon", mpc_horizon);
  w("replan_threshold", replan_threshold);
  w("threads", threads);
  return o.str();
}

encoder::EncoderConfig Config::encoder_config() const {
  encoder::EncoderConfig c;
  c.feature_dim = feature_dim;
  c.latent_dim = latent_dim;
  c.coord_feat = coord_feat;
  c.hidden = encoder_hidden;
  c.phi_channels = phi_channels;
  c.phi_dense = phi_dense;
  c.chunk = voxel_chunk;
  return c;
}

decoder::NerfConfig Config::nerf_config() const {
  decoder::NerfConfig c;
  c.latent_dim = latent_dim;
  c.lift_dim = lift_dim;
  c.hidden = nerf_hidden;
  c.layers = nerf_layers;
  c.fourier_bands = fourier_bands;
  c.color_eps = real(color_eps);
  return c;
}

decoder::RenderConfig Config::render_config(bool stratified) const {
  decoder::RenderConfig c;
  c.n_samples = n_samples;
  c.stratified = stratified;
  c.mask_dilation_px = mask_dilation_px;
  return c;
}

dynamics::DynamicsConfig Config::dynamics_config() const {
  dynamics::DynamicsConfig c;
  c.message_passes = message_passes;
  c.adjacency_mode = dynamics::adjacency_mode_from_string(adjacency_mode);
  c.quasi_static = quasi_static;
  c.kappa = kappa;
  c.dilation_once = dilation_once;
  c.dilation_in_loop = dilation_in_loop;
  return c;
}

planner::PlannerConfig Config::planner_config() const {
  planner::PlannerConfig c;
  c.p_goal = p_goal;
  c.p_contact = p_contact;
  c.action_magnitude = push_step;
  c.contact_offset = contact_offset;
  c.footprint_lo = {workspace_min_x, workspace_min_y};
  c.footprint_hi = {workspace_max_x, workspace_max_y};
  return c;
}

planner::MpcConfig Config::mpc_config() const {
  planner::MpcConfig c;
  c.candidates = mpc_candidates;
  c.horizon = mpc_horizon;
  c.replan_threshold = replan_threshold;
  return c;
}

scene::DatasetParams Config::dataset_params() const {
  scene::DatasetParams p;
  p.scene.workspace = workspace();
  p.push.workspace = workspace();
  p.push.step_size = push_step;
  p.direction_noise = direction_noise;
  p.max_frames = max_frames;
  p.min_frames = min_frames;
  return p;
}

}  // namespace compnerf::harness
