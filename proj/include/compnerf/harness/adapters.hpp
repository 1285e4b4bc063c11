#pragma once

#include "compnerf/harness/model.hpp"
#include "compnerf/planner/planner.hpp"

namespace compnerf::harness {

// Planner adapters. The planner module only sees the PlannerModel interface;
// these adapters bind it to either the learned model or the scene-forge
// oracle (the fast test tier that isolates planner correctness from model
// quality).

class LearnedPlannerModel : public planner::PlannerModel {
 public:
  LearnedPlannerModel(const Model& model, std::vector<encoder::PosedView> initial_views,
                      int articulated);

  planner::StateRef initial_state() const;
  planner::StateRef state_from_latents(std::vector<Tensor> latents,
                                       RigidTransform cumulative) const;
  const std::vector<Tensor>& latents(const planner::StateRef& state) const;

  planner::StateRef step(const planner::StateRef& state, Vec2 push) const override;
  std::vector<std::optional<Vec2>> centers_of_mass(const planner::StateRef&) const override;
  std::vector<std::optional<Vec3>> object_colors(const planner::StateRef&) const override;
  int articulated() const override { return articulated_; }
  size_t object_count() const override;

 private:
  const Model& model_;
  std::vector<encoder::PosedView> initial_views_;
  int articulated_;
  std::vector<Tensor> initial_latents_;
};

class OraclePlannerModel : public planner::PlannerModel {
 public:
  OraclePlannerModel(scene::SceneState initial, scene::PushParams push);

  planner::StateRef initial_state() const;
  const scene::SceneState& scene_of(const planner::StateRef& state) const;

  planner::StateRef step(const planner::StateRef& state, Vec2 push) const override;
  std::vector<std::optional<Vec2>> centers_of_mass(const planner::StateRef&) const override;
  std::vector<std::optional<Vec3>> object_colors(const planner::StateRef&) const override;
  int articulated() const override;
  size_t object_count() const override;

 private:
  scene::SceneState initial_;
  scene::PushParams push_;
};

// Execution environment backed by the push oracle.
class OracleEnvironment : public planner::Environment {
 public:
  OracleEnvironment(const OraclePlannerModel& model, scene::SceneState start,
                    scene::PushParams push)
      : model_(model), current_(std::move(start)), push_(push) {}

  planner::StateRef observe() override;
  void apply(Vec2 push) override;
  const scene::SceneState& current() const { return current_; }

 private:
  const OraclePlannerModel& model_;
  scene::SceneState current_;
  scene::PushParams push_;
};

// Self-consistency environment: the learned model is its own world.
class ModelEnvironment : public planner::Environment {
 public:
  ModelEnvironment(const LearnedPlannerModel& model, planner::StateRef start)
      : model_(model), current_(std::move(start)) {}

  planner::StateRef observe() override { return current_; }
  void apply(Vec2 push) override { current_ = model_.step(current_, push); }

 private:
  const LearnedPlannerModel& model_;
  planner::StateRef current_;
};

// Goal regions from JSON: [{"lo":[x,y],"hi":[x,y],"color":[r,g,b]}, ...].
planner::GoalSpec goal_spec_from_json(const std::string& text);
std::string goal_spec_to_json(const planner::GoalSpec& goal);

}  // namespace compnerf::harness
