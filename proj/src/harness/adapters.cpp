#include "compnerf/harness/adapters.hpp"

#include <nlohmann/json.hpp>

namespace compnerf::harness {

namespace {

struct LearnedState : planner::PlanState {
  std::vector<Tensor> latents;
  RigidTransform cumulative;
};

struct OracleState : planner::PlanState {
  scene::SceneState scene;
};

const LearnedState& as_learned(const planner::StateRef& s) {
  const auto* p = dynamic_cast<const LearnedState*>(s.get());
  check(p != nullptr, "planner state is not a learned-model state");
  return *p;
}

const OracleState& as_oracle(const planner::StateRef& s) {
  const auto* p = dynamic_cast<const OracleState*>(s.get());
  check(p != nullptr, "planner state is not an oracle state");
  return *p;
}

}  // namespace

LearnedPlannerModel::LearnedPlannerModel(const Model& model,
                                         std::vector<encoder::PosedView> initial_views,
                                         int articulated)
    : model_(model), initial_views_(std::move(initial_views)), articulated_(articulated) {
  initial_latents_ = model_.omega.encode_scene(initial_views_, model_.grid);
}

planner::StateRef LearnedPlannerModel::initial_state() const {
  return state_from_latents(initial_latents_, RigidTransform::identity());
}

planner::StateRef LearnedPlannerModel::state_from_latents(std::vector<Tensor> latents,
                                                          RigidTransform cumulative) const {
  auto s = std::make_shared<LearnedState>();
  s->latents = std::move(latents);
  s->cumulative = cumulative;
  return s;
}

const std::vector<Tensor>& LearnedPlannerModel::latents(const planner::StateRef& state) const {
  return as_learned(state).latents;
}

planner::StateRef LearnedPlannerModel::step(const planner::StateRef& state, Vec2 push) const {
  const LearnedState& cur = as_learned(state);
  dynamics::RolloutState rs{cur.latents, cur.cumulative};
  dynamics::OccupancyCache cache;
  const dynamics::RolloutState next = dynamics::rollout_step(
      model_.forward_model(), initial_views_, articulated_, rs, push, cache);
  auto s = std::make_shared<LearnedState>();
  s->latents = next.latents;
  s->cumulative = next.cumulative;
  return s;
}

std::vector<std::optional<Vec2>> LearnedPlannerModel::centers_of_mass(
    const planner::StateRef& state) const {
  const LearnedState& cur = as_learned(state);
  std::vector<std::optional<Vec2>> out;
  for (const auto& z : cur.latents) {
    try {
      const Vec3 com =
          decoder::center_of_mass(model_.field, z, model_.grid, model_.config.kappa);
      out.push_back(Vec2{com.x, com.y});
    } catch (const decoder::VanishedObjectError&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

std::vector<std::optional<Vec3>> LearnedPlannerModel::object_colors(
    const planner::StateRef& state) const {
  const LearnedState& cur = as_learned(state);
  std::vector<std::optional<Vec3>> out;
  for (const auto& z : cur.latents) {
    try {
      out.push_back(
          decoder::mean_decoded_color(model_.field, z, model_.grid, model_.config.kappa));
    } catch (const decoder::VanishedObjectError&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

size_t LearnedPlannerModel::object_count() const { return initial_latents_.size(); }

OraclePlannerModel::OraclePlannerModel(scene::SceneState initial, scene::PushParams push)
    : initial_(std::move(initial)), push_(push) {}

planner::StateRef OraclePlannerModel::initial_state() const {
  auto s = std::make_shared<OracleState>();
  s->scene = initial_;
  return s;
}

const scene::SceneState& OraclePlannerModel::scene_of(const planner::StateRef& state) const {
  return as_oracle(state).scene;
}

planner::StateRef OraclePlannerModel::step(const planner::StateRef& state, Vec2 push) const {
  auto s = std::make_shared<OracleState>();
  s->scene = scene::step_push_oracle(as_oracle(state).scene, push, push_).state;
  return s;
}

std::vector<std::optional<Vec2>> OraclePlannerModel::centers_of_mass(
    const planner::StateRef& state) const {
  std::vector<std::optional<Vec2>> out;
  for (const auto& obj : as_oracle(state).scene.objects) out.push_back(obj.position);
  return out;
}

std::vector<std::optional<Vec3>> OraclePlannerModel::object_colors(
    const planner::StateRef& state) const {
  std::vector<std::optional<Vec3>> out;
  for (const auto& obj : as_oracle(state).scene.objects) out.push_back(obj.color);
  return out;
}

int OraclePlannerModel::articulated() const { return initial_.pusher_index; }

size_t OraclePlannerModel::object_count() const { return initial_.objects.size(); }

planner::StateRef OracleEnvironment::observe() {
  auto s = std::make_shared<OracleState>();
  s->scene = current_;
  return s;
}

void OracleEnvironment::apply(Vec2 push) {
  current_ = scene::step_push_oracle(current_, push, push_).state;
}

planner::GoalSpec goal_spec_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  planner::GoalSpec goal;
  for (const auto& r : j) {
    planner::GoalRegion region;
    region.lo = {r.at("lo")[0], r.at("lo")[1]};
    region.hi = {r.at("hi")[0], r.at("hi")[1]};
    region.color_key = {r.at("color")[0], r.at("color")[1], r.at("color")[2]};
    goal.regions.push_back(region);
  }
  return goal;
}

std::string goal_spec_to_json(const planner::GoalSpec& goal) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : goal.regions)
    j.push_back({{"lo", {r.lo.x, r.lo.y}},
                 {"hi", {r.hi.x, r.hi.y}},
                 {"color", {r.color_key.x, r.color_key.y, r.color_key.z}}});
  return j.dump();
}

}  // namespace compnerf::harness
