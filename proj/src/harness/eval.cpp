#include "compnerf/harness/eval.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

namespace compnerf::harness {

namespace {

struct Accumulator {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  double mean() const {
    double acc = 0;
    for (double v : values) acc += v;
    return values.empty() ? 0 : acc / double(values.size());
  }
  double stderr_() const {
    if (values.size() < 2) return 0;
    const double m = mean();
    double acc = 0;
    for (double v : values) acc += (v - m) * (v - m);
    return std::sqrt(acc / double(values.size() - 1)) / std::sqrt(double(values.size()));
  }
};

io::ImageU8 masked_target(const io::ImageU8& rgb, const std::vector<uint8_t>& mask_total) {
  io::ImageU8 out = rgb;
  for (size_t p = 0; p < mask_total.size(); ++p)
    if (!mask_total[p])
      for (int ch = 0; ch < 3; ++ch) out.pixels[p * 3 + ch] = 0;
  return out;
}

}  // namespace

double EvalReport::row_mean(int step, const std::string& metric) const {
  for (const auto& r : rows)
    if (r.step == step && r.metric == metric) return r.mean;
  fail("EvalReport: no row for step " + std::to_string(step) + " metric " + metric);
}

dynamics::DynamicsConfig mode_config(const Model& model, const std::string& name) {
  dynamics::DynamicsConfig cfg = model.config.dynamics_config();
  if (name == "ours") {
    cfg.adjacency_mode = dynamics::AdjacencyMode::kInLoop;
    cfg.quasi_static = true;
  } else if (name == "dense") {
    cfg.adjacency_mode = dynamics::AdjacencyMode::kDense;
  } else if (name == "once") {
    cfg.adjacency_mode = dynamics::AdjacencyMode::kOncePerStep;
    cfg.quasi_static = true;
  } else if (name == "no_freeze") {
    cfg.adjacency_mode = dynamics::AdjacencyMode::kInLoop;
    cfg.quasi_static = false;
  } else {
    fail("unknown eval mode '" + name + "' (ours|dense|once|no_freeze)");
  }
  return cfg;
}

std::vector<EvalReport> evaluate_rollouts(const Model& model,
                                          const std::vector<scene::Trajectory>& test_set,
                                          const std::vector<std::string>& mode_names,
                                          const EvalOptions& opts,
                                          const std::function<void(size_t, size_t)>& progress) {
  decoder::RenderConfig render_cfg = model.config.render_config(/*stratified=*/false);
  if (opts.eval_n_samples > 0) render_cfg.n_samples = opts.eval_n_samples;
  const int horizon = opts.horizon;

  std::vector<EvalReport> reports(mode_names.size());
  for (size_t mi = 0; mi < mode_names.size(); ++mi) {
    reports[mi].mode = mode_names[mi];
    reports[mi].config_text = model.config.serialize();
    reports[mi].build_id = COMPNERF_GIT_SHA;
  }

  // metric accumulators [mode][step]
  const size_t n_modes = mode_names.size();
  std::vector<std::vector<Accumulator>> acc_mse(n_modes,
                                                std::vector<Accumulator>(horizon + 1));
  std::vector<std::vector<Accumulator>> acc_rel(n_modes,
                                                std::vector<Accumulator>(horizon + 1));
  std::vector<std::vector<Accumulator>> acc_com(n_modes,
                                                std::vector<Accumulator>(horizon + 1));

  int usable = 0, skipped = 0;
  size_t done = 0;
  for (const auto& traj : test_set) {
    if (int(traj.displacements.size()) < horizon) {
      skipped += 1;
      continue;
    }
    if (opts.max_scenes > 0 && usable >= opts.max_scenes) break;
    usable += 1;

    const std::vector<Vec2> actions(traj.displacements.begin(),
                                    traj.displacements.begin() + horizon);
    const auto views0 = make_posed_views(traj, 0);

    // Shared across modes: per-step re-encoded reconstructions, targets and
    // pixel sets built from the ground-truth masks.
    std::vector<std::vector<io::ImageU8>> recon_renders(horizon + 1);
    std::vector<std::vector<io::ImageU8>> targets(horizon + 1);
    std::vector<std::vector<std::vector<uint8_t>>> pixel_sets(horizon + 1);
    for (int t = 0; t <= horizon; ++t) {
      const auto views_t = make_posed_views(traj, size_t(t));
      const auto latents_t = model.omega.encode_scene(views_t, model.grid);
      for (size_t v = 0; v < views_t.size(); ++v) {
        const auto& frame_view = traj.frames[size_t(t)].views[v];
        decoder::TrainingRays tr = decoder::select_training_rays(
            frame_view.masks, traj.rig.width, traj.rig.height, render_cfg.mask_dilation_px);
        recon_renders[t].push_back(decoder::render_image(model.field, latents_t,
                                                         traj.rig.cameras[v], model.grid.box,
                                                         render_cfg, &frame_view.masks));
        targets[t].push_back(masked_target(frame_view.rgb, tr.mask_total));
        pixel_sets[t].push_back(std::move(tr.mask_enlarged));
      }
    }

    for (size_t mi = 0; mi < n_modes; ++mi) {
      const auto fm = model.forward_model(mode_config(model, mode_names[mi]));
      const auto rollout =
          dynamics::forward_predict(fm, views0, traj.articulated, actions);
      for (int t = 0; t <= horizon; ++t) {
        double mse = 0, rel = 0;
        for (size_t v = 0; v < traj.rig.cameras.size(); ++v) {
          const io::ImageU8 pred = decoder::render_image(
              model.field, rollout[size_t(t)], traj.rig.cameras[v], model.grid.box,
              render_cfg, &traj.frames[size_t(t)].views[v].masks);
          mse += decoder::masked_mse(pred, targets[t][v], pixel_sets[t][v]);
          rel += decoder::masked_mse(pred, recon_renders[t][v], pixel_sets[t][v]);
        }
        mse /= double(traj.rig.cameras.size());
        rel /= double(traj.rig.cameras.size());

        double com_err = 0;
        int com_n = 0;
        for (size_t j = 0; j < traj.states[size_t(t)].objects.size(); ++j) {
          if (int(j) == traj.articulated) continue;
          const auto& obj = traj.states[size_t(t)].objects[j];
          const Vec3 gt{obj.position.x, obj.position.y, obj.body_height() / 2};
          double err;
          try {
            const Vec3 com = decoder::center_of_mass(model.field, rollout[size_t(t)][j],
                                                     model.grid, model.config.kappa);
            err = (com - gt).norm();
          } catch (const decoder::VanishedObjectError&) {
            err = model.grid.box.diagonal();  // vanished object: full-scale penalty
          }
          com_err += err;
          com_n += 1;
        }
        if (com_n > 0) com_err /= double(com_n);

        acc_mse[mi][size_t(t)].add(mse);
        acc_rel[mi][size_t(t)].add(rel);
        acc_com[mi][size_t(t)].add(com_err);
        if (t == horizon) {
          reports[mi].terminal_masked_mse.push_back(mse);
          reports[mi].terminal_com_error.push_back(com_err);
        }
      }
    }
    done += 1;
    if (progress) progress(done, test_set.size());
  }
  check(usable > 0, "evaluate_rollouts: no trajectory has >= horizon+1 frames");

  for (size_t mi = 0; mi < n_modes; ++mi) {
    reports[mi].skipped_short = skipped;
    for (int t = 0; t <= horizon; ++t) {
      reports[mi].rows.push_back(
          {t, "masked_mse", acc_mse[mi][size_t(t)].mean(), acc_mse[mi][size_t(t)].stderr_()});
      reports[mi].rows.push_back(
          {t, "relative_mse", acc_rel[mi][size_t(t)].mean(), acc_rel[mi][size_t(t)].stderr_()});
      reports[mi].rows.push_back(
          {t, "com_error", acc_com[mi][size_t(t)].mean(), acc_com[mi][size_t(t)].stderr_()});
    }
  }
  return reports;
}

void write_eval_csv(const std::string& path, const std::vector<EvalReport>& reports) {
  const std::filesystem::path base(path);
  for (const auto& report : reports) {
    std::filesystem::path p = base;
    p.replace_filename(base.stem().string() + "_" + report.mode +
                       base.extension().string());
    std::ofstream out(p);
    check(bool(out), "write_eval_csv: cannot write " + p.string());
    out << "step,metric,mean,stderr\n";
    out.precision(10);
    for (const auto& r : report.rows)
      out << r.step << "," << r.metric << "," << r.mean << "," << r.stderr_ << "\n";
  }
}

double reconstruction_mse(const Model& model, const std::vector<scene::Trajectory>& scenes,
                          int max_scenes, int eval_n_samples) {
  decoder::RenderConfig render_cfg = model.config.render_config(false);
  if (eval_n_samples > 0) render_cfg.n_samples = eval_n_samples;
  double acc = 0;
  int n = 0;
  for (const auto& traj : scenes) {
    if (max_scenes > 0 && n >= max_scenes) break;
    const auto views = make_posed_views(traj, 0);
    const auto latents = model.omega.encode_scene(views, model.grid);
    double scene_acc = 0;
    for (size_t v = 0; v < views.size(); ++v) {
      const auto& frame_view = traj.frames[0].views[v];
      decoder::TrainingRays tr = decoder::select_training_rays(
          frame_view.masks, traj.rig.width, traj.rig.height, render_cfg.mask_dilation_px);
      const io::ImageU8 pred =
          decoder::render_image(model.field, latents, traj.rig.cameras[v], model.grid.box,
                                render_cfg, &frame_view.masks);
      scene_acc +=
          decoder::masked_mse(pred, masked_target(frame_view.rgb, tr.mask_total),
                              tr.mask_enlarged);
    }
    acc += scene_acc / double(views.size());
    n += 1;
  }
  check(n > 0, "reconstruction_mse: no scenes");
  return acc / double(n);
}

std::vector<uint8_t> analytic_occupancy(const scene::ObjectState& obj,
                                        const encoder::WorkspaceGrid& grid) {
  std::vector<uint8_t> occ(grid.size(), 0);
  for (int64_t i = 0; i < grid.size(); ++i) {
    const Vec3 p = grid.centers[i];
    if (p.z < 0 || p.z > obj.body_height()) continue;
    if (obj.is_cylinder()) {
      const auto& cy = std::get<scene::CylinderShape>(obj.shape);
      const Vec2 d{p.x - obj.position.x, p.y - obj.position.y};
      if (d.norm() <= cy.radius) occ[i] = 1;
    } else {
      const auto& b = std::get<scene::BoxShape>(obj.shape);
      const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
      const double lx = c * (p.x - obj.position.x) + s * (p.y - obj.position.y);
      const double ly = -s * (p.x - obj.position.x) + c * (p.y - obj.position.y);
      if (std::abs(lx) <= b.width / 2 && std::abs(ly) <= b.depth / 2) occ[i] = 1;
    }
  }
  return occ;
}

double calibrate_kappa(const Model& model, const scene::Trajectory& traj,
                       const std::vector<double>& candidates) {
  check(!candidates.empty(), "calibrate_kappa: no candidates");
  const auto views = make_posed_views(traj, 0);
  const auto latents = model.omega.encode_scene(views, model.grid);
  double best_iou = -1, best_kappa = candidates[0];
  for (const double kappa : candidates) {
    double iou_acc = 0;
    int n = 0;
    for (size_t j = 0; j < latents.size(); ++j) {
      if (int(j) == traj.articulated) continue;
      const auto truth = analytic_occupancy(traj.states[0].objects[j], model.grid);
      const auto occ = decoder::occupancy(model.field, latents[j], model.grid, kappa);
      int64_t inter = 0, uni = 0;
      for (int64_t i = 0; i < model.grid.size(); ++i) {
        inter += truth[i] && occ.cells[i];
        uni += truth[i] || occ.cells[i];
      }
      iou_acc += uni > 0 ? double(inter) / double(uni) : 0.0;
      n += 1;
    }
    const double iou = n > 0 ? iou_acc / n : 0.0;
    if (iou > best_iou) {
      best_iou = iou;
      best_kappa = kappa;
    }
  }
  return best_kappa;
}

}  // namespace compnerf::harness
