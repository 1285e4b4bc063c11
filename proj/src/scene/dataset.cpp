#include "compnerf/scene/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace compnerf::scene {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

FrameData render_frame(const SceneState& state, const CameraRig& rig) {
  FrameData fd;
  for (const auto& cam : rig.cameras) fd.views.push_back(render_ground_truth(state, cam));
  return fd;
}

bool pusher_step_stays_inside(const SceneState& state, Vec2 delta, const PushParams& push) {
  const auto& p = state.pusher();
  const Vec2 np = p.position + delta;
  const double r = p.footprint_radius();
  return np.x >= push.workspace.lo.x + r && np.x <= push.workspace.hi.x - r &&
         np.y >= push.workspace.lo.y + r && np.y <= push.workspace.hi.y - r;
}

}  // namespace

Trajectory generate_trajectory(Rng& rng, int n_objects, const CameraRig& rig,
                               const DatasetParams& params) {
  Trajectory traj;
  traj.rig = rig;
  SceneState state = sample_scene(rng, n_objects, params.scene);
  traj.articulated = state.pusher_index;
  traj.states.push_back(state);
  traj.frames.push_back(render_frame(state, rig));

  int target = int(rng.randint(n_objects));
  int retargets = 0;
  while (int(traj.frames.size()) < params.max_frames) {
    const Vec2 to_target = state.objects[target].position - state.pusher().position;
    const double heading = std::atan2(to_target.y, to_target.x) +
                           params.direction_noise * rng.normal();
    const Vec2 delta{params.push.step_size * std::cos(heading),
                     params.push.step_size * std::sin(heading)};
    if (!pusher_step_stays_inside(state, delta, params.push)) {
      if (++retargets > params.max_retargets) break;
      target = int(rng.randint(n_objects));
      continue;
    }
    PushResult res = step_push_oracle(state, delta, params.push);
    state = std::move(res.state);
    traj.displacements.push_back(delta);
    traj.states.push_back(state);
    traj.frames.push_back(render_frame(state, rig));
    if (res.object_clamped) break;  // an object is pinned at the workspace edge
  }
  return traj;
}

std::vector<Trajectory> generate_dataset(Rng& rng, int n_scenes, int n_objects,
                                         const CameraRig& rig, const DatasetParams& params) {
  std::vector<Trajectory> out(n_scenes);
  for (int s = 0; s < n_scenes; ++s) {
    Rng stream = rng.fork(uint64_t(s));
    Trajectory t = generate_trajectory(stream, n_objects, rig, params);
    while (int(t.frames.size()) < params.min_frames) {
      stream = stream.fork(99);  // crowded draw, retry with a derived stream
      t = generate_trajectory(stream, n_objects, rig, params);
    }
    out[s] = std::move(t);
  }
  return out;
}

namespace {

json pose_json(const ObjectState& o) {
  return json{o.position.x, o.position.y, o.yaw};
}

json shape_json(const ObjectState& o) {
  json j;
  if (o.is_cylinder()) {
    const auto& c = std::get<CylinderShape>(o.shape);
    j = {{"type", "cylinder"}, {"radius", c.radius}, {"height", c.height}};
  } else {
    const auto& b = std::get<BoxShape>(o.shape);
    j = {{"type", "box"}, {"width", b.width}, {"depth", b.depth}, {"height", b.height}};
  }
  j["color"] = {o.color.x, o.color.y, o.color.z};
  return j;
}

ObjectState object_from_json(const json& shape, const json& pose) {
  ObjectState o;
  if (shape.at("type") == "cylinder") {
    o.shape = CylinderShape{shape.at("radius"), shape.at("height")};
  } else {
    o.shape = BoxShape{shape.at("width"), shape.at("depth"), shape.at("height")};
  }
  o.color = {shape.at("color")[0], shape.at("color")[1], shape.at("color")[2]};
  o.position = {pose[0], pose[1]};
  o.yaw = pose[2];
  return o;
}

}  // namespace

void save_dataset(const std::string& dir, const std::vector<Trajectory>& trajectories) {
  fs::create_directories(dir);
  for (size_t s = 0; s < trajectories.size(); ++s) {
    const auto& traj = trajectories[s];
    const fs::path sdir = fs::path(dir) / ("scene_" + std::to_string(s));
    fs::create_directories(sdir);

    json cams;
    cams["width"] = traj.rig.width;
    cams["height"] = traj.rig.height;
    cams["cameras"] = json::array();
    for (const auto& cam : traj.rig.cameras)
      cams["cameras"].push_back(std::vector<double>(cam.k.begin(), cam.k.end()));
    std::ofstream(sdir / "cameras.json") << cams.dump(1) << "\n";

    json meta;
    meta["articulated"] = traj.articulated;
    meta["shapes"] = json::array();
    for (const auto& o : traj.states.at(0).objects) meta["shapes"].push_back(shape_json(o));
    meta["poses"] = json::array();
    for (const auto& st : traj.states) {
      json frame = json::array();
      for (const auto& o : st.objects) frame.push_back(pose_json(o));
      meta["poses"].push_back(frame);
    }
    meta["displacements"] = json::array();
    for (const auto& d : traj.displacements) meta["displacements"].push_back({d.x, d.y});
    std::ofstream(sdir / "meta.json") << meta.dump(1) << "\n";

    for (size_t t = 0; t < traj.frames.size(); ++t) {
      const fs::path fdir = sdir / ("frame_" + std::to_string(t));
      fs::create_directories(fdir);
      const auto& frame = traj.frames[t];
      for (size_t v = 0; v < frame.views.size(); ++v) {
        io::write_png((fdir / ("view_" + std::to_string(v) + ".png")).string(),
                      frame.views[v].rgb);
        for (size_t j = 0; j < frame.views[v].masks.size(); ++j) {
          io::ImageU8 mask;
          mask.width = traj.rig.width;
          mask.height = traj.rig.height;
          mask.channels = 1;
          mask.pixels.resize(frame.views[v].masks[j].size());
          for (size_t p = 0; p < mask.pixels.size(); ++p)
            mask.pixels[p] = frame.views[v].masks[j][p] ? 255 : 0;
          io::write_png(
              (fdir / ("mask_" + std::to_string(v) + "_" + std::to_string(j) + ".png")).string(),
              mask);
        }
      }
    }
  }
}

std::vector<Trajectory> load_dataset(const std::string& dir) {
  std::vector<Trajectory> out;
  for (size_t s = 0;; ++s) {
    const fs::path sdir = fs::path(dir) / ("scene_" + std::to_string(s));
    if (!fs::exists(sdir)) break;
    Trajectory traj;

    json cams;
    {
      std::ifstream in(sdir / "cameras.json");
      check(bool(in), "load_dataset: missing " + (sdir / "cameras.json").string());
      in >> cams;
    }
    traj.rig.width = cams.at("width");
    traj.rig.height = cams.at("height");
    for (const auto& jk : cams.at("cameras")) {
      Camera cam;
      cam.width = traj.rig.width;
      cam.height = traj.rig.height;
      for (size_t i = 0; i < 12; ++i) cam.k[i] = jk[i];
      traj.rig.cameras.push_back(cam);
    }

    json meta;
    {
      std::ifstream in(sdir / "meta.json");
      check(bool(in), "load_dataset: missing " + (sdir / "meta.json").string());
      in >> meta;
    }
    traj.articulated = meta.at("articulated");
    const auto& shapes = meta.at("shapes");
    for (const auto& frame_poses : meta.at("poses")) {
      SceneState st;
      for (size_t j = 0; j < shapes.size(); ++j)
        st.objects.push_back(object_from_json(shapes[j], frame_poses[j]));
      st.pusher_index = traj.articulated;
      traj.states.push_back(st);
    }
    for (const auto& d : meta.at("displacements"))
      traj.displacements.push_back({d[0], d[1]});

    const size_t n_objects = shapes.size();
    for (size_t t = 0;; ++t) {
      const fs::path fdir = sdir / ("frame_" + std::to_string(t));
      if (!fs::exists(fdir)) break;
      FrameData fd;
      for (size_t v = 0; v < traj.rig.cameras.size(); ++v) {
        RenderedView view;
        view.rgb = io::read_png((fdir / ("view_" + std::to_string(v) + ".png")).string());
        for (size_t j = 0; j < n_objects; ++j) {
          const io::ImageU8 m = io::read_png(
              (fdir / ("mask_" + std::to_string(v) + "_" + std::to_string(j) + ".png")).string());
          std::vector<uint8_t> bits(m.pixels.size());
          for (size_t p = 0; p < bits.size(); ++p) bits[p] = m.pixels[p] >= 128 ? 1 : 0;
          view.masks.push_back(std::move(bits));
        }
        fd.views.push_back(std::move(view));
      }
      traj.frames.push_back(std::move(fd));
    }
    check(traj.frames.size() == traj.states.size(),
          "load_dataset: frame/pose count mismatch in " + sdir.string());
    out.push_back(std::move(traj));
  }
  check(!out.empty(), "load_dataset: no scenes found under " + dir);
  return out;
}

}  // namespace compnerf::scene
