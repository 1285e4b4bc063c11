#include "compnerf/planner/planner.hpp"

#include <algorithm>
#include <cmath>

namespace compnerf::planner {

std::vector<int> assign_objects(const std::vector<std::optional<Vec3>>& colors,
                                const GoalSpec& goal, int articulated) {
  std::vector<int> assignment(goal.regions.size(), -1);
  std::vector<bool> claimed(colors.size(), false);
  for (size_t r = 0; r < goal.regions.size(); ++r) {
    double best = 1e30;
    int best_j = -1;
    for (size_t j = 0; j < colors.size(); ++j) {
      if (int(j) == articulated || claimed[j] || !colors[j]) continue;
      const Vec3 d = *colors[j] - goal.regions[r].color_key;
      const double dist = d.norm();
      if (dist < best) {
        best = dist;
        best_j = int(j);
      }
    }
    assignment[r] = best_j;
    if (best_j >= 0) claimed[best_j] = true;
  }
  return assignment;
}

int goal_cost(const PlannerModel& model, const StateRef& state, const GoalSpec& goal) {
  if (goal.regions.empty()) return 0;
  const auto colors = model.object_colors(state);
  const auto coms = model.centers_of_mass(state);
  const auto assignment = assign_objects(colors, goal, model.articulated());
  int outside = 0;
  for (size_t r = 0; r < goal.regions.size(); ++r) {
    const int j = assignment[r];
    if (j < 0 || !coms[j] || !goal.regions[r].contains(*coms[j])) outside += 1;
  }
  return outside;
}

namespace {

Vec2 clamp_to_footprint(Vec2 p, const PlannerConfig& cfg) {
  return {std::clamp(p.x, cfg.footprint_lo.x, cfg.footprint_hi.x),
          std::clamp(p.y, cfg.footprint_lo.y, cfg.footprint_hi.y)};
}

Vec2 com_or_center(const std::optional<Vec2>& com, const PlannerConfig& cfg) {
  if (com) return *com;
  return {(cfg.footprint_lo.x + cfg.footprint_hi.x) / 2,
          (cfg.footprint_lo.y + cfg.footprint_hi.y) / 2};
}

}  // namespace

TargetSample sample_target(Rng& rng, const std::vector<std::optional<Vec2>>& current_coms,
                           const GoalSpec& goal, const std::vector<int>& assignment,
                           int articulated, const PlannerConfig& cfg) {
  const size_t m = current_coms.size();
  TargetSample g(m);
  for (size_t j = 0; j < m; ++j) g[j] = com_or_center(current_coms[j], cfg);

  // Regions whose assigned object currently sits outside.
  std::vector<size_t> unfinished;
  for (size_t r = 0; r < goal.regions.size(); ++r) {
    const int j = assignment.size() > r ? assignment[r] : -1;
    if (j < 0 || !current_coms[j] || !goal.regions[r].contains(*current_coms[j]))
      if (j >= 0) unfinished.push_back(r);
  }

  const double u = rng.uniform();
  if (u < cfg.p_goal && !unfinished.empty()) {
    const size_t r = unfinished[size_t(rng.randint(int64_t(unfinished.size())))];
    const auto& region = goal.regions[r];
    g[assignment[r]] = {rng.uniform(region.lo.x, region.hi.x),
                        rng.uniform(region.lo.y, region.hi.y)};
  } else if (u < cfg.p_goal + cfg.p_contact && m > 1) {
    // Bias toward interaction: pusher target adjacent to a random object.
    size_t j = size_t(rng.randint(int64_t(m)));
    if (int(j) == articulated) j = (j + 1) % m;
    const double angle = rng.uniform(0, 2 * M_PI);
    g[articulated] = com_or_center(current_coms[j], cfg) +
                     Vec2{std::cos(angle), std::sin(angle)} * cfg.contact_offset;
  } else {
    for (size_t j = 0; j < m; ++j)
      g[j] = {rng.uniform(cfg.footprint_lo.x, cfg.footprint_hi.x),
              rng.uniform(cfg.footprint_lo.y, cfg.footprint_hi.y)};
  }
  for (size_t j = 0; j < m; ++j) g[j] = clamp_to_footprint(g[j], cfg);
  return g;
}

int nearest_node(const PlanTree& tree, const TargetSample& target, const PlannerConfig& cfg) {
  check(!tree.nodes.empty(), "nearest_node: empty tree");
  double best = 1e300;
  int best_i = 0;
  for (size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& coms = tree.nodes[i].coms;
    double d2 = 0;
    for (size_t j = 0; j < target.size(); ++j) {
      const Vec2 c = com_or_center(coms[j], cfg);
      const Vec2 d = c - target[j];
      d2 += d.dot(d);
    }
    if (d2 < best) {
      best = d2;
      best_i = int(i);
    }
  }
  return best_i;
}

PlanResult rrt_plan(const PlannerModel& model, const StateRef& root, const GoalSpec& goal,
                    int budget, Rng& rng, const PlannerConfig& cfg) {
  PlanResult result;
  PlanTree tree;

  PlanNode root_node;
  root_node.state = root;
  root_node.coms = model.centers_of_mass(root);
  root_node.cost = goal_cost(model, root, goal);
  tree.nodes.push_back(root_node);

  auto finish = [&](int node_index) {
    result.success = true;
    result.tree_size = tree.nodes.size();
    std::vector<int> path;
    for (int i = node_index; i >= 0; i = tree.nodes[i].parent) path.push_back(i);
    std::reverse(path.begin(), path.end());
    for (size_t p = 0; p < path.size(); ++p) {
      result.planned_coms.push_back(tree.nodes[path[p]].coms);
      if (p > 0) result.actions.push_back(tree.nodes[path[p]].action);
    }
    result.best_cost = 0;
    return result;
  };

  if (root_node.cost == 0) return finish(0);

  const auto root_colors = model.object_colors(root);
  const auto assignment = assign_objects(root_colors, goal, model.articulated());
  int best_cost = root_node.cost;

  for (int it = 0; it < budget; ++it) {
    result.samples_used = it + 1;
    int expand_index;
    if (cfg.control_tree) {
      expand_index = int(rng.randint(int64_t(tree.nodes.size())));
    } else {
      const TargetSample g =
          sample_target(rng, tree.nodes[0].coms, goal, assignment, model.articulated(), cfg);
      expand_index = nearest_node(tree, g, cfg);
    }
    const double angle = rng.uniform(0, 2 * M_PI);
    const Vec2 action = Vec2{std::cos(angle), std::sin(angle)} * cfg.action_magnitude;

    PlanNode node;
    node.state = model.step(tree.nodes[expand_index].state, action);
    node.parent = expand_index;
    node.action = action;
    node.cumulative =
        tree.nodes[expand_index].cumulative.compose(RigidTransform::from_planar(action));
    node.depth = tree.nodes[expand_index].depth + 1;
    node.coms = model.centers_of_mass(node.state);
    node.cost = goal_cost(model, node.state, goal);
    check(node.parent >= 0 && node.parent < int(tree.nodes.size()),
          "rrt_plan: tree invariant violated (parent must precede child)");
    tree.nodes.push_back(node);
    best_cost = std::min(best_cost, node.cost);
    if (node.cost == 0) return finish(int(tree.nodes.size()) - 1);
  }
  result.success = false;
  result.best_cost = best_cost;
  result.tree_size = tree.nodes.size();
  return result;
}

namespace {

double com_deviation(const std::vector<std::optional<Vec2>>& a,
                     const std::vector<std::optional<Vec2>>& b, const PlannerConfig& cfg) {
  double worst = 0;
  for (size_t j = 0; j < a.size(); ++j) {
    const Vec2 d = com_or_center(a[j], cfg) - com_or_center(b[j], cfg);
    worst = std::max(worst, d.norm());
  }
  return worst;
}

}  // namespace

MpcLog mpc_execute(const PlannerModel& model, Environment& env, const GoalSpec& goal,
                   int plan_budget, Rng& rng, const PlannerConfig& cfg,
                   const MpcConfig& mpc) {
  MpcLog log;
  PlanResult plan = rrt_plan(model, env.observe(), goal, plan_budget, rng, cfg);
  if (!plan.success) {
    log.aborted = true;
    return log;
  }
  log.planned_steps = int(plan.actions.size());
  const int step_limit =
      std::max(1, int(std::floor(mpc.step_limit_factor * double(plan.actions.size()))));
  size_t plan_index = 0;

  while (log.steps_executed < step_limit) {
    const StateRef obs = env.observe();
    if (goal_cost(model, obs, goal) == 0) {
      log.reached_goal = true;
      return log;
    }
    const auto obs_coms = model.centers_of_mass(obs);
    const double deviation =
        com_deviation(obs_coms, plan.planned_coms[std::min(plan_index,
                                                           plan.planned_coms.size() - 1)],
                      cfg);
    log.deviations.push_back(deviation);
    const bool plan_exhausted = plan_index >= plan.actions.size();
    if (deviation > mpc.replan_threshold || plan_exhausted) {
      if (log.replans >= mpc.max_replans) {
        log.aborted = true;
        return log;
      }
      plan = rrt_plan(model, obs, goal, plan_budget, rng, cfg);
      log.replans += 1;
      if (!plan.success) {
        log.aborted = true;
        return log;
      }
      log.planned_steps = int(plan.actions.size());
      plan_index = 0;
      if (plan.actions.empty()) continue;
    }

    // Candidate short-horizon sequences; candidate 0 is the planned
    // continuation, the rest are random. Ties keep the lowest index.
    const size_t horizon = std::min<size_t>(mpc.horizon, plan.actions.size() - plan_index);
    double best_score = 1e300;
    Vec2 best_first{0, 0};
    for (int c = 0; c < mpc.candidates; ++c) {
      std::vector<Vec2> seq;
      for (size_t t = 0; t < horizon; ++t) {
        if (c == 0) {
          seq.push_back(plan.actions[plan_index + t]);
        } else {
          const double angle = rng.uniform(0, 2 * M_PI);
          seq.push_back(Vec2{std::cos(angle), std::sin(angle)} * cfg.action_magnitude);
        }
      }
      StateRef sim = obs;
      double score = 0;
      for (size_t t = 0; t < seq.size(); ++t) {
        sim = model.step(sim, seq[t]);
        score += com_deviation(model.centers_of_mass(sim),
                               plan.planned_coms[plan_index + t + 1], cfg);
      }
      if (score < best_score) {
        best_score = score;
        best_first = seq.empty() ? Vec2{0, 0} : seq[0];
      }
    }
    env.apply(best_first);
    log.steps_executed += 1;
    plan_index += 1;
  }
  log.reached_goal = goal_cost(model, env.observe(), goal) == 0;
  return log;
}

}  // namespace compnerf::planner
