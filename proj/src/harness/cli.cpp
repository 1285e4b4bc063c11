#include "compnerf/harness/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "compnerf/core/parallel.hpp"
#include "compnerf/harness/adapters.hpp"
#include "compnerf/harness/eval.hpp"
#include "compnerf/harness/train_ae.hpp"
#include "compnerf/harness/train_gnn.hpp"

namespace compnerf::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "key = value configuration file");
  cmd->add_option("--set", c.overrides, "inline config override key=value")->take_all();
  cmd->add_option("--seed", c.seed, "RNG seed");
  cmd->add_option("--threads", c.threads, "kernel threads (1 = deterministic serial mode)");
}

Config resolve_config(const CommonOpts& c) {
  Config cfg = c.config_path.empty() ? Config{} : Config::from_file(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    check(eq != std::string::npos, "--set expects key=value, got '" + kv + "'");
    cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.threads > 0) cfg.threads = c.threads;
  set_num_threads(cfg.threads > 0 ? cfg.threads : num_threads());
  return cfg;
}

void print_summary(const json& j) { std::cout << j.dump() << std::endl; }

Model load_model_checked(const std::string& path) {
  check(fs::exists(path), "checkpoint file does not exist: " + path);
  return model_from_checkpoint(load_checkpoint(path));
}

std::vector<scene::Trajectory> load_data_checked(const std::string& dir) {
  check(fs::exists(dir), "dataset directory does not exist: " + dir);
  return scene::load_dataset(dir);
}

int cmd_gen_data(const CommonOpts& common, const std::string& out_dir, int scenes,
                 int objects) {
  const Config cfg = resolve_config(common);
  Rng rng = Rng::seeded(common.seed);
  const scene::CameraRig rig =
      scene::make_default_rig(cfg.image_width, cfg.image_height, cfg.workspace());
  const auto data = scene::generate_dataset(rng, scenes, objects, rig, cfg.dataset_params());
  scene::save_dataset(out_dir, data);
  size_t frames = 0;
  for (const auto& t : data) frames += t.frames.size();
  print_summary({{"command", "gen-data"},
                 {"out", out_dir},
                 {"scenes", scenes},
                 {"objects", objects},
                 {"frames", frames},
                 {"seed", common.seed}});
  return 0;
}

int cmd_train_ae(const CommonOpts& common, const std::string& data_dir,
                 const std::string& out_ckpt, int iterations, bool resume, bool quiet) {
  const Config cfg = resolve_config(common);
  const auto data = load_data_checked(data_dir);
  Rng rng = Rng::seeded(common.seed);
  Model model = build_model(cfg, rng);
  AeTrainOptions opts;
  opts.iterations = iterations;
  opts.checkpoint_path = out_ckpt;
  opts.loss_csv_path = out_ckpt + ".loss.csv";
  opts.resume = resume;
  const AeTrainReport report = train_autoencoder(
      model, data, opts, rng, quiet ? std::function<void(int, double)>{} : [&](int it, double loss) {
        if (it % cfg.log_every == 0) std::cerr << "iter " << it << " loss " << loss << "\n";
      });
  print_summary({{"command", "train-ae"},
                 {"checkpoint", out_ckpt},
                 {"iterations", report.iterations_run},
                 {"final_loss", report.losses.empty() ? 0.0 : report.losses.back().second},
                 {"empty_pixel_sets", report.empty_pixel_sets}});
  return 0;
}

int cmd_train_gnn(const CommonOpts& common, const std::string& data_dir,
                  const std::string& ae_ckpt, const std::string& out_ckpt, int iterations,
                  const std::string& cache_path, bool quiet) {
  Model model = load_model_checked(ae_ckpt);
  if (common.threads > 0) set_num_threads(common.threads);
  const auto data = load_data_checked(data_dir);
  Rng rng = Rng::seeded(common.seed);

  LatentCache cache;
  if (!cache_path.empty() && fs::exists(cache_path)) {
    cache = load_latent_cache(cache_path);
  } else {
    cache = encode_dataset(model, data, [&](size_t done, size_t total) {
      if (!quiet && done % 10 == 0) std::cerr << "encoded " << done << "/" << total << "\n";
    });
    if (!cache_path.empty()) save_latent_cache(cache_path, cache);
  }

  GnnTrainOptions opts;
  opts.iterations = iterations;
  opts.checkpoint_path = out_ckpt;
  const auto report = train_dynamics(model, cache, opts, rng,
                                     quiet ? std::function<void(int, double)>{}
                                           : [&](int it, double loss) {
                                               if (it % 100 == 0)
                                                 std::cerr << "iter " << it << " loss "
                                                           << loss << "\n";
                                             });
  const OneStepEval one_step = evaluate_one_step(model, cache);
  print_summary({{"command", "train-gnn"},
                 {"checkpoint", out_ckpt},
                 {"iterations", report.losses.size()},
                 {"final_loss", report.losses.empty() ? 0.0 : report.losses.back()},
                 {"skipped_short", report.skipped_short},
                 {"one_step_mse", one_step.model_mse},
                 {"copy_baseline_mse", one_step.copy_mse}});
  return 0;
}

int cmd_render(const CommonOpts& common, const std::string& ckpt, const std::string& data_dir,
               int scene_idx, int frame, int view, const std::string& out_png, bool novel) {
  Model model = load_model_checked(ckpt);
  if (common.threads > 0) set_num_threads(common.threads);
  const auto data = load_data_checked(data_dir);
  check(scene_idx >= 0 && scene_idx < int(data.size()), "scene index out of range");
  const auto& traj = data[size_t(scene_idx)];
  check(frame >= 0 && frame < int(traj.frames.size()), "frame index out of range");
  check(view >= 0 && view < int(traj.rig.cameras.size()), "view index out of range");
  const auto views = make_posed_views(traj, size_t(frame));
  const auto latents = model.omega.encode_scene(views, model.grid);
  const auto* masks = novel ? nullptr : &traj.frames[size_t(frame)].views[size_t(view)].masks;
  const io::ImageU8 img =
      decoder::render_image(model.field, latents, traj.rig.cameras[size_t(view)],
                            model.grid.box, model.config.render_config(false), masks);
  io::write_png(out_png, img);
  print_summary({{"command", "render"},
                 {"out", out_png},
                 {"scene", scene_idx},
                 {"frame", frame},
                 {"view", view},
                 {"novel", novel}});
  return 0;
}

int cmd_predict(const CommonOpts& common, const std::string& ckpt,
                const std::string& data_dir, int scene_idx, int steps,
                const std::string& out_dir, const std::vector<int>& views_sel) {
  Model model = load_model_checked(ckpt);
  if (common.threads > 0) set_num_threads(common.threads);
  const auto data = load_data_checked(data_dir);
  check(scene_idx >= 0 && scene_idx < int(data.size()), "scene index out of range");
  const auto& traj = data[size_t(scene_idx)];
  check(steps <= int(traj.displacements.size()),
        "trajectory has only " + std::to_string(traj.displacements.size()) + " steps");
  const std::vector<Vec2> actions(traj.displacements.begin(),
                                  traj.displacements.begin() + steps);
  const auto views0 = make_posed_views(traj, 0);
  const auto rollout =
      dynamics::forward_predict(model.forward_model(), views0, traj.articulated, actions);
  fs::create_directories(out_dir);
  std::vector<int> views = views_sel;
  if (views.empty())
    for (int v = 0; v < int(traj.rig.cameras.size()); ++v) views.push_back(v);
  int written = 0;
  for (int t = 1; t <= steps; ++t)
    for (const int v : views) {
      const io::ImageU8 img = decoder::render_image(
          model.field, rollout[size_t(t)], traj.rig.cameras[size_t(v)], model.grid.box,
          model.config.render_config(false), nullptr);
      io::write_png(out_dir + "/pred_" + std::to_string(t) + "_view_" + std::to_string(v) +
                        ".png",
                    img);
      written += 1;
    }
  print_summary({{"command", "predict"},
                 {"out", out_dir},
                 {"steps", steps},
                 {"frames_written", written}});
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& ckpt, const std::string& data_dir,
             int horizon, const std::string& modes_csv, const std::string& out_csv,
             int max_scenes, int eval_samples) {
  Model model = load_model_checked(ckpt);
  if (common.threads > 0) set_num_threads(common.threads);
  const auto data = load_data_checked(data_dir);
  std::vector<std::string> modes;
  for (size_t b = 0; b < modes_csv.size();) {
    const size_t e = std::min(modes_csv.find(',', b), modes_csv.size());
    modes.push_back(modes_csv.substr(b, e - b));
    b = e + 1;
  }
  EvalOptions opts;
  opts.horizon = horizon;
  opts.max_scenes = max_scenes;
  opts.eval_n_samples = eval_samples;
  const auto reports = evaluate_rollouts(model, data, modes, opts);
  write_eval_csv(out_csv, reports);
  json summary{{"command", "eval"}, {"out", out_csv}, {"horizon", horizon}};
  for (const auto& r : reports) {
    summary["terminal_masked_mse"][r.mode] = r.row_mean(horizon, "masked_mse");
    summary["terminal_com_error"][r.mode] = r.row_mean(horizon, "com_error");
    summary["skipped_short"] = r.skipped_short;
  }
  print_summary(summary);
  return 0;
}

int cmd_plan(const CommonOpts& common, const std::string& ckpt, const std::string& data_dir,
             int scene_idx, const std::string& goals_path, int budget,
             const std::string& mode, const std::string& out_dir, bool control_tree) {
  const auto data = load_data_checked(data_dir);
  check(scene_idx >= 0 && scene_idx < int(data.size()), "scene index out of range");
  const auto& traj = data[size_t(scene_idx)];
  std::ifstream gf(goals_path);
  check(bool(gf), "cannot open goal file " + goals_path);
  std::stringstream gbuf;
  gbuf << gf.rdbuf();
  const planner::GoalSpec goal = goal_spec_from_json(gbuf.str());
  Rng rng = Rng::seeded(common.seed);
  fs::create_directories(out_dir);

  planner::PlanResult result;
  Config cfg = resolve_config(common);
  std::unique_ptr<Model> model;
  std::unique_ptr<LearnedPlannerModel> learned;
  std::unique_ptr<OraclePlannerModel> oracle;

  if (mode == "learned") {
    check(!ckpt.empty(), "--checkpoint is required in learned mode");
    model = std::make_unique<Model>(load_model_checked(ckpt));
    if (common.threads > 0) set_num_threads(common.threads);
    cfg = model->config;
    learned = std::make_unique<LearnedPlannerModel>(*model, make_posed_views(traj, 0),
                                                    traj.articulated);
    result = planner::rrt_plan(*learned, learned->initial_state(), goal, budget, rng,
                               [&] {
                                 auto pc = cfg.planner_config();
                                 pc.control_tree = control_tree;
                                 return pc;
                               }());
  } else if (mode == "oracle") {
    scene::PushParams push = cfg.dataset_params().push;
    oracle = std::make_unique<OraclePlannerModel>(traj.states.at(0), push);
    result = planner::rrt_plan(*oracle, oracle->initial_state(), goal, budget, rng,
                               [&] {
                                 auto pc = cfg.planner_config();
                                 pc.control_tree = control_tree;
                                 return pc;
                               }());
  } else {
    fail("plan: mode must be learned or oracle, got '" + mode + "'");
  }

  // Action sequence as JSON.
  json ja = json::array();
  for (const auto& a : result.actions) ja.push_back({a.x, a.y});
  json out{{"command", "plan"},    {"mode", mode},
           {"success", result.success}, {"samples_used", result.samples_used},
           {"best_cost", result.best_cost}, {"actions", ja}};
  {
    std::ofstream af(out_dir + "/actions.json");
    af << out.dump(1) << "\n";
  }

  // Per-step rendered frames of the planned trajectory.
  int frames_written = 0;
  if (result.success) {
    if (mode == "oracle") {
      scene::SceneState st = traj.states.at(0);
      const scene::PushParams push = cfg.dataset_params().push;
      for (size_t t = 0; t <= result.actions.size(); ++t) {
        const auto rv = scene::render_ground_truth(st, traj.rig.cameras.at(0));
        io::write_png(out_dir + "/plan_" + std::to_string(t) + ".png", rv.rgb);
        frames_written += 1;
        if (t < result.actions.size())
          st = scene::step_push_oracle(st, result.actions[t], push).state;
      }
    } else {
      planner::StateRef st = learned->initial_state();
      for (size_t t = 0; t <= result.actions.size(); ++t) {
        const io::ImageU8 img = decoder::render_image(
            model->field, learned->latents(st), traj.rig.cameras.at(0), model->grid.box,
            model->config.render_config(false), nullptr);
        io::write_png(out_dir + "/plan_" + std::to_string(t) + ".png", img);
        frames_written += 1;
        if (t < result.actions.size()) st = learned->step(st, result.actions[t]);
      }
    }
  }
  out["frames_written"] = frames_written;
  print_summary(out);
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Compositional object-centric NeRF dynamics"};
  app.require_subcommand(1);

  CommonOpts common;

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic pushing dataset");
  std::string gen_out = "dataset";
  int gen_scenes = 10, gen_objects = 2;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--scenes", gen_scenes, "number of scenes");
  gen->add_option("--objects", gen_objects, "boxes per scene (pusher added on top)");
  add_common(gen, common);

  // train-ae
  auto* tae = app.add_subcommand("train-ae", "train the compositional NeRF auto-encoder");
  std::string tae_data, tae_out = "ae.ckpt";
  int tae_iters = 0;
  bool tae_resume = false, tae_quiet = false;
  tae->add_option("--data", tae_data, "dataset directory")->required();
  tae->add_option("--out", tae_out, "checkpoint path");
  tae->add_option("--iterations", tae_iters, "override config iteration count");
  tae->add_flag("--resume", tae_resume, "resume from the checkpoint");
  tae->add_flag("--quiet", tae_quiet, "suppress progress lines");
  add_common(tae, common);

  // train-gnn
  auto* tgn = app.add_subcommand("train-gnn", "train the latent GNN dynamics model");
  std::string tgn_data, tgn_ae, tgn_out = "full.ckpt", tgn_cache;
  int tgn_iters = 0;
  bool tgn_quiet = false;
  tgn->add_option("--data", tgn_data, "dataset directory")->required();
  tgn->add_option("--ae", tgn_ae, "trained auto-encoder checkpoint")->required();
  tgn->add_option("--out", tgn_out, "checkpoint path");
  tgn->add_option("--iterations", tgn_iters, "override config iteration count");
  tgn->add_option("--latent-cache", tgn_cache, "latent cache file (reused when present)");
  tgn->add_flag("--quiet", tgn_quiet, "suppress progress lines");
  add_common(tgn, common);

  // render
  auto* ren = app.add_subcommand("render", "encode a frame and render it");
  std::string ren_ckpt, ren_data, ren_out = "render.png";
  int ren_scene = 0, ren_frame = 0, ren_view = 0;
  bool ren_novel = false;
  ren->add_option("--checkpoint", ren_ckpt, "model checkpoint")->required();
  ren->add_option("--data", ren_data, "dataset directory")->required();
  ren->add_option("--scene", ren_scene, "scene index");
  ren->add_option("--frame", ren_frame, "frame index");
  ren->add_option("--view", ren_view, "view index");
  ren->add_option("--out", ren_out, "output PNG");
  ren->add_flag("--novel", ren_novel, "render every pixel (no mask restriction)");
  add_common(ren, common);

  // predict
  auto* pre = app.add_subcommand("predict", "forward-predict and render future frames");
  std::string pre_ckpt, pre_data, pre_out = "predictions";
  int pre_scene = 0, pre_steps = 15;
  std::vector<int> pre_views;
  pre->add_option("--checkpoint", pre_ckpt, "model checkpoint")->required();
  pre->add_option("--data", pre_data, "dataset directory")->required();
  pre->add_option("--scene", pre_scene, "scene index");
  pre->add_option("--steps", pre_steps, "prediction steps");
  pre->add_option("--views", pre_views, "view indices (default: all)");
  pre->add_option("--out", pre_out, "output directory");
  add_common(pre, common);

  // eval
  auto* ev = app.add_subcommand("eval", "error-vs-horizon evaluation");
  std::string ev_ckpt, ev_data, ev_modes = "ours,dense", ev_out = "eval.csv";
  int ev_horizon = 20, ev_max_scenes = 0, ev_samples = 0;
  ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  ev->add_option("--data", ev_data, "test dataset directory")->required();
  ev->add_option("--horizon", ev_horizon, "rollout horizon");
  ev->add_option("--modes", ev_modes, "comma list: ours,dense,once,no_freeze");
  ev->add_option("--out", ev_out, "output CSV stem");
  ev->add_option("--max-scenes", ev_max_scenes, "cap on scenes (0 = all)");
  ev->add_option("--eval-samples", ev_samples, "ray samples for eval renders");
  add_common(ev, common);

  // plan
  auto* pl = app.add_subcommand("plan", "latent-space RRT planning");
  std::string pl_ckpt, pl_data, pl_goals, pl_mode = "oracle", pl_out = "plan";
  int pl_scene = 0, pl_budget = 100000;
  bool pl_control = false;
  pl->add_option("--checkpoint", pl_ckpt, "model checkpoint (learned mode)");
  pl->add_option("--data", pl_data, "dataset directory (initial observation)")->required();
  pl->add_option("--scene", pl_scene, "scene index");
  pl->add_option("--goals", pl_goals, "goal regions JSON file")->required();
  pl->add_option("--budget", pl_budget, "max samples");
  pl->add_option("--mode", pl_mode, "learned|oracle");
  pl->add_option("--out", pl_out, "output directory");
  pl->add_flag("--control-tree", pl_control, "uniform node choice ablation");
  add_common(pl, common);

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen_data(common, gen_out, gen_scenes, gen_objects);
    if (tae->parsed())
      return cmd_train_ae(common, tae_data, tae_out, tae_iters, tae_resume, tae_quiet);
    if (tgn->parsed())
      return cmd_train_gnn(common, tgn_data, tgn_ae, tgn_out, tgn_iters, tgn_cache,
                           tgn_quiet);
    if (ren->parsed())
      return cmd_render(common, ren_ckpt, ren_data, ren_scene, ren_frame, ren_view, ren_out,
                        ren_novel);
    if (pre->parsed())
      return cmd_predict(common, pre_ckpt, pre_data, pre_scene, pre_steps, pre_out,
                         pre_views);
    if (ev->parsed())
      return cmd_eval(common, ev_ckpt, ev_data, ev_horizon, ev_modes, ev_out, ev_max_scenes,
                      ev_samples);
    if (pl->parsed())
      return cmd_plan(common, pl_ckpt, pl_data, pl_scene, pl_goals, pl_budget, pl_mode,
                      pl_out, pl_control);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace compnerf::harness
