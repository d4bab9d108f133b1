#include "grop/planner.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

#include "grop/rng.hpp"

namespace grop {

const char* to_string(Aggregation a) {
  switch (a) {
    case Aggregation::Product: return "product";
    case Aggregation::Sum: return "sum";
    case Aggregation::Mean: return "mean";
  }
  return "?";
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "product") return Aggregation::Product;
  if (s == "sum") return Aggregation::Sum;
  if (s == "mean") return Aggregation::Mean;
  throw std::invalid_argument("unknown aggregation '" + s + "'");
}

bool TaskMotionPlan::has_gaps() const {
  return std::any_of(motion_plan.begin(), motion_plan.end(), [](const Trajectory& t) { return t.gap; }) ||
         std::any_of(pairs.begin(), pairs.end(), [](const PairGrounding& p) { return p.gap; });
}

double aggregate(const std::vector<double>& values, Aggregation mode) {
  if (values.empty()) return 1.0;
  switch (mode) {
    case Aggregation::Product:
      return std::accumulate(values.begin(), values.end(), 1.0, std::multiplies<>());
    case Aggregation::Sum: return std::accumulate(values.begin(), values.end(), 0.0);
    case Aggregation::Mean:
      return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  }
  return 0.0;
}

Grounder::Grounder(const Environment& env, const TaskSpec& task, HeatmapFn heatmaps, PlannerConfig config)
    : env_(env), task_(task), heatmaps_(std::move(heatmaps)), config_(config) {
  if (!(config_.velocity > 0.0)) throw std::invalid_argument("velocity must be positive");
  if (config_.bonus < 0.0) throw std::invalid_argument("bonus must be non-negative");
  if (config_.samples < 1) throw std::invalid_argument("sample count must be at least 1");
  validate_task(env_, task_);
  locations_ = symbolic_locations(env_);
  domain_ = make_task_domain(env_, locations_, task_);
  reachable_ = reachable_from(env_.map(), env_.map().to_cell(task_.start.position()));
  heatmap_cache_.resize(task_.moves.size());
}

const Heatmap& Grounder::heatmap(int object) {
  auto& slot = heatmap_cache_.at(static_cast<std::size_t>(object));
  if (!slot) slot = heatmaps_(env_, task_.moves[static_cast<std::size_t>(object)].target);
  return *slot;
}

double Grounder::side_feasibility(int object, int location) {
  const auto key = std::make_pair(object, location);
  if (auto it = feasibility_cache_.find(key); it != feasibility_cache_.end()) return it->second;
  const double f = fea_t(locations_.at(static_cast<std::size_t>(location)), heatmap(object), config_.samples,
                         derive_seed(config_.seed, {0xFEA, static_cast<std::uint64_t>(object),
                                                    static_cast<std::uint64_t>(location)}));
  feasibility_cache_.emplace(key, f);
  return f;
}

Vec2 Grounder::action_target(const SymbolicAction& a) const {
  if (a.kind == ActionKind::Unload) return task_.moves.at(static_cast<std::size_t>(a.object)).target;
  const std::string& id = task_.moves.at(static_cast<std::size_t>(a.object)).object_id;
  for (const PlacedObject& o : env_.objects()) {
    if (o.id == id) return o.position;
  }
  throw SceneError("unknown object '" + id + "'");
}

namespace {

Pose facing(const Vec2& p, const Vec2& target) { return Pose(p.x(), p.y(), bearing(p, target)); }

// Region cell closest to `target` (first in sorted order on ties).
Vec2 nearest_cell(const SymbolicLocation& l, const Vec2& target) {
  Vec2 best = l.grid.to_world(l.region.front());
  for (const CellIndex& c : l.region) {
    const Vec2 p = l.grid.to_world(c);
    if ((p - target).squaredNorm() < (best - target).squaredNorm()) best = p;
  }
  return best;
}

}  // namespace

Grounder::Stand Grounder::stand_for(const SymbolicAction& a, StandPolicy policy, std::uint64_t stand_seed) {
  const SymbolicLocation& loc = locations_.at(static_cast<std::size_t>(a.location));
  const Vec2 target = action_target(a);
  if (loc.fixed_stand) return {loc.stand, false};
  if (!loc.reachable()) return {Pose(target.x(), target.y(), 0.0), true};
  if (a.kind != ActionKind::Unload) return {facing(nearest_cell(loc, target), target), false};

  const std::array<std::uint64_t, 4> key{static_cast<std::uint64_t>(policy), static_cast<std::uint64_t>(a.object),
                                         static_cast<std::uint64_t>(a.location),
                                         policy == StandPolicy::Uniform ? stand_seed : 0};
  if (auto it = stand_cache_.find(key); it != stand_cache_.end()) return it->second;

  const Heatmap& h = heatmap(a.object);
  Stand s;
  const StandSampler sampler(loc, h);
  if (policy == StandPolicy::Heatmap && sampler.has_mass()) {
    s.pose = sampler.draw(0, derive_seed(config_.seed, {0x5A, static_cast<std::uint64_t>(a.object),
                                                        static_cast<std::uint64_t>(a.location)}));
  } else {
    std::vector<Vec2> support;
    for (const CellIndex& c : h.frame.lattice()) {
      const Vec2 p = h.geometry.to_world(c);
      const CellIndex m = env_.map().to_cell(p);
      if (loc.contains(p) && !env_.map().blocked(m) && reachable_(m.row, m.col)) support.push_back(p);
    }
    if (!support.empty()) {
      Rng rng(derive_seed(policy == StandPolicy::Uniform ? stand_seed : config_.seed,
                          {0x11, static_cast<std::uint64_t>(a.object), static_cast<std::uint64_t>(a.location)}));
      std::uniform_int_distribution<std::size_t> pick(0, support.size() - 1);
      s.pose = facing(support[pick(rng)], target);
    } else {
      s.pose = facing(nearest_cell(loc, target), target);
      s.gap = true;
    }
    // A heatmap without mass on this side still grounds the plan, but marks it.
    if (policy == StandPolicy::Heatmap) s.gap = true;
  }
  stand_cache_.emplace(key, s);
  return s;
}

Trajectory Grounder::leg(const Pose& from, const Pose& to) {
  const std::array<double, 6> key{from.x, from.y, from.theta, to.x, to.y, to.theta};
  if (auto it = leg_cache_.find(key); it != leg_cache_.end()) return it->second;
  NavResult r = plan_navigation(env_.map(), from, to);
  Trajectory t;
  if (r.ok()) {
    t = std::move(r.trajectory);
  } else {
    t.waypoints = {from, to};
    t.gap = true;
  }
  leg_cache_.emplace(key, t);
  return t;
}

TaskMotionPlan Grounder::ground(const TaskPlan& plan, StandPolicy policy, std::uint64_t stand_seed) {
  TaskMotionPlan out;
  out.task_plan = plan;
  out.positions.push_back(task_.start);
  Pose here = task_.start;
  std::vector<double> evaluated;
  std::optional<std::size_t> pending_nav;
  bool pending_gap = false;
  double pending_cost = 0.0;

  const auto& actions = plan.actions;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const SymbolicAction& a = actions[i];
    if (a.kind == ActionKind::Navigate) {
      if (i + 1 >= actions.size() || !actions[i + 1].is_manipulation() ||
          actions[i + 1].location != a.location) {
        throw std::invalid_argument("navigation at step " + std::to_string(i + 1) +
                                    " is not followed by a manipulation at its destination");
      }
      const Stand s = stand_for(actions[i + 1], policy, stand_seed);
      Trajectory t = leg(here, s.pose);
      t.kind = TrajectoryKind::Navigation;
      pending_nav = i;
      pending_gap = t.gap || s.gap;
      pending_cost = trajectory_cost(t, config_.velocity);
      out.motion_plan.push_back(std::move(t));
      here = s.pose;
      out.positions.push_back(here);
      continue;
    }

    const Stand s = stand_for(a, policy, stand_seed);
    Trajectory m;
    m.kind = TrajectoryKind::Manipulation;
    m.target = action_target(a);
    bool gap = s.gap;
    if (pending_nav || s.pose == here) {
      m.waypoints = {here};
      gap = gap || (pending_nav && pending_gap);
    } else {
      const Trajectory r = leg(here, s.pose);
      m.waypoints = r.waypoints;
      m.gap = r.gap;
      gap = gap || r.gap;
      here = s.pose;
      out.positions.push_back(here);
    }
    PairGrounding p;
    p.navigate = pending_nav;
    p.manipulation = i;
    p.location = a.location;
    p.object = a.object;
    p.stand = here;
    p.cost = trajectory_cost(m, config_.velocity, config_.arm.manipulation_cost) + (pending_nav ? pending_cost : 0.0);
    p.gap = gap;
    if (a.kind == ActionKind::Unload) {
      p.evaluated = true;
      p.feasibility = gap ? 0.0 : side_feasibility(a.object, a.location);
    } else if (gap) {
      p.evaluated = true;
      p.feasibility = 0.0;
    }
    if (p.evaluated) evaluated.push_back(p.feasibility);
    out.pairs.push_back(p);
    out.motion_plan.push_back(std::move(m));
    pending_nav.reset();
  }

  out.cost = 0.0;
  for (const Trajectory& t : out.motion_plan) {
    out.cost += trajectory_cost(t, config_.velocity, config_.arm.manipulation_cost);
  }
  out.feasibility = aggregate(evaluated, config_.aggregation);
  out.utility = utility(out.feasibility, out.cost, config_.bonus);
  return out;
}

std::size_t select_plan(const std::vector<TaskMotionPlan>& candidates, double bonus) {
  if (candidates.empty()) throw UnsolvableError("no candidate plans");
  std::size_t best = 0;
  double best_u = utility(candidates[0].feasibility, candidates[0].cost, bonus);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double u = utility(candidates[i].feasibility, candidates[i].cost, bonus);
    if (u > best_u || (u == best_u && candidates[i].cost < candidates[best].cost)) {
      best = i;
      best_u = u;
    }
  }
  return best;
}

void rescore(std::vector<TaskMotionPlan>& candidates, double bonus) {
  for (TaskMotionPlan& p : candidates) p.utility = utility(p.feasibility, p.cost, bonus);
}

PlanningResult ground_candidates(Grounder& grounder) {
  const PlanSet set = enumerate_satisficing_plans(grounder.domain());
  if (set.plans.empty()) throw UnsolvableError(set.diagnostic.empty() ? "no satisficing plan" : set.diagnostic);
  PlanningResult r;
  r.domain = grounder.domain();
  r.candidates.reserve(set.plans.size());
  for (const TaskPlan& p : set.plans) r.candidates.push_back(grounder.ground(p));
  return r;
}

PlanningResult grop_plan(const Environment& env, const TaskSpec& task, const HeatmapFn& heatmaps,
                         const PlannerConfig& config) {
  Grounder g(env, task, heatmaps, config);
  PlanningResult r = ground_candidates(g);
  r.selected = select_plan(r.candidates, config.bonus);
  return r;
}

int ExecutionReport::successes() const {
  return static_cast<int>(std::count_if(targets.begin(), targets.end(),
                                        [](const TargetOutcome& t) { return t.success; }));
}

ExecutionReport execute_plan(const TaskMotionPlan& plan, const Environment& env, const TaskSpec& task,
                             const ExecutionOptions& options, std::uint64_t seed) {
  if (plan.motion_plan.size() != plan.task_plan.actions.size()) {
    throw std::invalid_argument("motion plan does not match the task plan");
  }
  if (!options.allow_gaps && plan.has_gaps()) throw std::invalid_argument("plan has trajectory gaps");
  Rng rng(seed);
  ExecutionReport report;
  Pose nominal = task.start;
  Pose actual = task.start;
  std::string stop_failure;

  for (std::size_t i = 0; i < plan.motion_plan.size(); ++i) {
    const SymbolicAction& a = plan.task_plan.actions[i];
    const Trajectory& t = plan.motion_plan[i];
    const bool moves = t.kind == TrajectoryKind::Navigation || t.waypoints.size() > 1;
    double step_cost = a.is_manipulation() ? options.arm.manipulation_cost : 0.0;
    if (moves) {
      const Pose goal = t.stand();
      if (t.gap) {
        step_cost += t.length() / options.velocity;
        stop_failure = "gap";
        actual = goal;
      } else {
        NavResult r = plan_navigation(env.map(), actual, goal);
        const Trajectory& driven = r.ok() ? r.trajectory : t;
        step_cost += driven.length() / options.velocity;
        const ExecResult e = execute_navigation(env.static_map(), driven, options.noise, rng);
        if (!e.ok()) {
          stop_failure = "navigation-collision";
          actual = goal;
        } else if (env.map().is_chair(env.map().to_cell(e.achieved.position()))) {
          stop_failure = "bumped-chair";
          actual = goal;
        } else {
          stop_failure.clear();
          actual = e.achieved;
        }
      }
      nominal = goal;
    }
    report.realized_time += step_cost;

    if (a.kind != ActionKind::Unload) continue;
    TargetOutcome out;
    out.object = a.object;
    const Vec2 target = *t.target;
    if (t.gap || plan.pairs.end() != std::find_if(plan.pairs.begin(), plan.pairs.end(), [&](const PairGrounding& p) {
          return p.manipulation == i && p.gap;
        })) {
      out.reason = "gap";
    } else if (!stop_failure.empty()) {
      out.reason = stop_failure;
    } else if (const ManipResult m = plan_manipulation(env.map(), actual, target, options.arm); !m.ok()) {
      out.reason = to_string(m.status);
    } else if (placement_error(nominal, actual, target) > options.tolerance) {
      out.reason = "placement";
    } else {
      out.success = true;
    }
    report.targets.push_back(out);
  }
  return report;
}

std::string plan_report_json(const PlanningResult& result) {
  using nlohmann::ordered_json;
  const TaskDomain& d = result.domain;
  ordered_json root;
  root["format"] = 1;
  root["planner"] = result.planner;
  root["selected"] = result.selected;
  root["candidates"] = ordered_json::array();
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    const TaskMotionPlan& p = result.candidates[i];
    ordered_json c;
    c["index"] = i;
    c["selected"] = i == result.selected;
    c["actions"] = ordered_json::array();
    for (const SymbolicAction& a : p.task_plan.actions) c["actions"].push_back(d.describe(a));
    c["pairs"] = ordered_json::array();
    for (const PairGrounding& g : p.pairs) {
      ordered_json j;
      j["action"] = d.describe(p.task_plan.actions[g.manipulation]);
      j["side"] = d.locations.at(static_cast<std::size_t>(g.location)).name;
      j["stand"] = {g.stand.x, g.stand.y, g.stand.theta};
      j["feasibility"] = g.feasibility;
      j["evaluated"] = g.evaluated;
      j["leg_cost"] = g.cost;
      j["gap"] = g.gap;
      c["pairs"].push_back(j);
    }
    c["feasibility"] = p.feasibility;
    c["cost"] = p.cost;
    c["utility"] = p.utility;
    root["candidates"].push_back(c);
  }
  return root.dump(2) + "\n";
}

}  // namespace grop
