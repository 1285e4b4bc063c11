#pragma once

#include <string>

#include "compnerf/scene/push_oracle.hpp"
#include "compnerf/scene/raycast.hpp"

namespace compnerf::scene {

struct FrameData {
  std::vector<RenderedView> views;  // one per camera
};

struct Trajectory {
  CameraRig rig;
  std::vector<FrameData> frames;
  int articulated = -1;
  // Ground truth below is for evaluation only; the models never read it.
  std::vector<SceneState> states;  // per frame
  std::vector<Vec2> displacements;  // per step (frames.size()-1 entries)
};

struct DatasetParams {
  SceneSampleParams scene;
  PushParams push;
  double direction_noise = 0.2;  // rad, per-step Gaussian on the push heading
  int max_frames = 28;
  int min_frames = 4;
  int max_retargets = 6;
};

// Rolls out the data-collection heuristic: pick a random target object, step
// the pusher toward its center with noisy heading until the pusher would
// leave the workspace (new target) or an object is pinned at the wall
// (terminate); every frame is rendered into the trajectory.
Trajectory generate_trajectory(Rng& rng, int n_objects, const CameraRig& rig,
                               const DatasetParams& params = {});

// Per-trajectory RNG streams are forked from `rng`, so the result does not
// depend on generation order.
std::vector<Trajectory> generate_dataset(Rng& rng, int n_scenes, int n_objects,
                                         const CameraRig& rig, const DatasetParams& params = {});

// Directory layout:
//   scene_<n>/frame_<t>/view_<i>.png        8-bit RGB
//   scene_<n>/frame_<t>/mask_<i>_<j>.png    8-bit binary
//   scene_<n>/cameras.json                  row-major 3x4 matrices
//   scene_<n>/meta.json                     articulated index, poses, displacements
void save_dataset(const std::string& dir, const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> load_dataset(const std::string& dir);

}  // namespace compnerf::scene
