#pragma once

#include <memory>
#include <optional>

#include "compnerf/core/rng.hpp"
#include "compnerf/geom/geom.hpp"

namespace compnerf::planner {

// The planner sees the world only through this interface: opaque states,
// model-predicted planar centers of mass, and model-predicted object colors.
// It never reads ground-truth poses.
struct PlanState {
  virtual ~PlanState() = default;
};
using StateRef = std::shared_ptr<const PlanState>;

struct PlannerModel {
  virtual ~PlannerModel() = default;
  virtual StateRef step(const StateRef& state, Vec2 push) const = 0;
  // Planar COM per object (pusher included); nullopt marks a vanished object.
  virtual std::vector<std::optional<Vec2>> centers_of_mass(const StateRef& state) const = 0;
  virtual std::vector<std::optional<Vec3>> object_colors(const StateRef& state) const = 0;
  virtual int articulated() const = 0;
  virtual size_t object_count() const = 0;
};

struct GoalRegion {
  Vec2 lo, hi;     // axis-aligned planar rectangle, meters
  Vec3 color_key;  // object assignment by nearest mean decoded color
  bool contains(Vec2 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
};

struct GoalSpec {
  std::vector<GoalRegion> regions;
};

struct PlannerConfig {
  double p_goal = 0.3;     // move one unfinished object's target into its region
  double p_contact = 0.4;  // place the pusher target adjacent to an object
  double action_magnitude = 0.02;
  double contact_offset = 0.05;
  Vec2 footprint_lo{-0.2, -0.2}, footprint_hi{0.2, 0.2};
  bool control_tree = false;  // ablation: uniform node choice, no target bias
};

// Region -> object index (or -1), greedy nearest-color without replacement.
std::vector<int> assign_objects(const std::vector<std::optional<Vec3>>& colors,
                                const GoalSpec& goal, int articulated);

// Number of goal-assigned objects outside their region; vanished objects and
// unassignable regions count as outside.
int goal_cost(const PlannerModel& model, const StateRef& state, const GoalSpec& goal);

using TargetSample = std::vector<Vec2>;  // one planar target per object, size m

TargetSample sample_target(Rng& rng, const std::vector<std::optional<Vec2>>& current_coms,
                           const GoalSpec& goal, const std::vector<int>& assignment,
                           int articulated, const PlannerConfig& cfg);

struct PlanNode {
  StateRef state;
  int parent = -1;
  Vec2 action;
  RigidTransform cumulative;  // pusher transform from the root
  int depth = 0;
  std::vector<std::optional<Vec2>> coms;  // cached at insertion
  int cost = 0;
};

struct PlanTree {
  std::vector<PlanNode> nodes;
};

// Argmin of the L2 distance between the cached COM vector and the target
// (vanished components fall back to the footprint center); ties break to the
// lowest insertion index.
int nearest_node(const PlanTree& tree, const TargetSample& target, const PlannerConfig& cfg);

struct PlanResult {
  bool success = false;
  std::vector<Vec2> actions;
  std::vector<std::vector<std::optional<Vec2>>> planned_coms;  // root..goal, actions+1 entries
  int samples_used = 0;
  int best_cost = -1;
  size_t tree_size = 0;
};

PlanResult rrt_plan(const PlannerModel& model, const StateRef& root, const GoalSpec& goal,
                    int budget, Rng& rng, const PlannerConfig& cfg);

// Execution target for the MPC loop.
struct Environment {
  virtual ~Environment() = default;
  virtual StateRef observe() = 0;
  virtual void apply(Vec2 push) = 0;
};

struct MpcConfig {
  int candidates = 32;
  int horizon = 5;
  double replan_threshold = 0.04;  // max per-object COM deviation, meters
  int max_replans = 8;
  double step_limit_factor = 3.0;  // of the planned step count
};

struct MpcLog {
  bool reached_goal = false;
  bool aborted = false;  // replanning failed or replan budget exhausted
  int steps_executed = 0;
  int replans = 0;
  int planned_steps = 0;
  std::vector<double> deviations;  // per executed cycle
};

MpcLog mpc_execute(const PlannerModel& model, Environment& env, const GoalSpec& goal,
                   int plan_budget, Rng& rng, const PlannerConfig& cfg, const MpcConfig& mpc);

}  // namespace compnerf::planner
