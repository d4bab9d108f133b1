#include "grop/taskplan.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace grop {

int TaskDomain::location_index(const std::string& name) const {
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (locations[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

SymbolicState TaskDomain::initial_state() const {
  SymbolicState s;
  s.insert({PredicateKind::RobotAt, -1, robot_start});
  for (std::size_t o = 0; o < objects.size(); ++o) {
    s.insert({PredicateKind::ObjectAt, static_cast<int>(o), objects[o].source});
  }
  return s;
}

bool TaskDomain::goal_reached(const SymbolicState& s) const {
  for (std::size_t o = 0; o < objects.size(); ++o) {
    if (!s.contains({PredicateKind::Placed, static_cast<int>(o), -1})) return false;
  }
  return true;
}

std::string TaskDomain::describe(const SymbolicAction& a) const {
  const auto loc = [&](int i) {
    return i >= 0 && i < static_cast<int>(locations.size()) ? locations[static_cast<std::size_t>(i)].name
                                                            : "?";
  };
  const auto obj = [&](int i) {
    return i >= 0 && i < static_cast<int>(objects.size()) ? objects[static_cast<std::size_t>(i)].id
                                                          : "?";
  };
  switch (a.kind) {
    case ActionKind::Navigate: return "navigate(" + loc(a.from) + ", " + loc(a.location) + ")";
    case ActionKind::Load: return "load(" + obj(a.object) + ", " + loc(a.location) + ")";
    case ActionKind::Unload: return "unload(" + obj(a.object) + ", " + loc(a.location) + ")";
  }
  return "?";
}

TaskDomain make_task_domain(const Environment& env, const std::vector<SymbolicLocation>& locations,
                            const TaskSpec& task) {
  TaskDomain d;
  for (const SymbolicLocation& l : locations) d.locations.push_back({l.name, l.reachable(), l.unload_side});
  for (const ObjectMove& m : task.moves) {
    const int src = d.location_index(m.source);
    if (src < 0) throw SceneError("unknown source location '" + m.source + "'");
    d.objects.push_back({m.object_id, src});
  }
  d.robot_start = -1;
  const CellIndex start_cell = env.map().to_cell(task.start.position());
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if ((locations[i].fixed_stand && locations[i].stand == task.start) ||
        locations[i].contains(start_cell)) {
      d.robot_start = static_cast<int>(i);
      break;
    }
  }
  if (d.robot_start < 0) throw SceneError("robot start pose is not inside any symbolic location");
  return d;
}

std::set<Predicate> preconditions(const SymbolicAction& a) {
  switch (a.kind) {
    case ActionKind::Navigate: return {{PredicateKind::RobotAt, -1, a.from}};
    case ActionKind::Load:
      return {{PredicateKind::RobotAt, -1, a.location}, {PredicateKind::ObjectAt, a.object, a.location}};
    case ActionKind::Unload:
      return {{PredicateKind::RobotAt, -1, a.location}, {PredicateKind::InHand, a.object, -1}};
  }
  return {};
}

std::set<Predicate> add_effects(const SymbolicAction& a) {
  switch (a.kind) {
    case ActionKind::Navigate: return {{PredicateKind::RobotAt, -1, a.location}};
    case ActionKind::Load: return {{PredicateKind::InHand, a.object, -1}};
    case ActionKind::Unload: return {{PredicateKind::Placed, a.object, -1}};
  }
  return {};
}

std::set<Predicate> delete_effects(const SymbolicAction& a) {
  switch (a.kind) {
    case ActionKind::Navigate: return {{PredicateKind::RobotAt, -1, a.from}};
    case ActionKind::Load: return {{PredicateKind::ObjectAt, a.object, a.location}};
    case ActionKind::Unload: return {{PredicateKind::InHand, a.object, -1}};
  }
  return {};
}

namespace {

bool in_range(int i, std::size_t n) { return i >= 0 && static_cast<std::size_t>(i) < n; }

std::size_t in_hand_count(const SymbolicState& s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](const Predicate& p) { return p.kind == PredicateKind::InHand; }));
}

// Static (non-predicate) constraints plus STRIPS preconditions.
bool applicable(const TaskDomain& d, const SymbolicState& s, const SymbolicAction& a) {
  if (!in_range(a.location, d.locations.size())) return false;
  const DomainLocation& loc = d.locations[static_cast<std::size_t>(a.location)];
  switch (a.kind) {
    case ActionKind::Navigate:
      if (!in_range(a.from, d.locations.size()) || a.from == a.location || !loc.reachable) return false;
      break;
    case ActionKind::Load:
      if (!in_range(a.object, d.objects.size())) return false;
      if (d.capacity > 0 && in_hand_count(s) >= static_cast<std::size_t>(d.capacity)) return false;
      break;
    case ActionKind::Unload:
      if (!in_range(a.object, d.objects.size()) || !loc.unload_side) return false;
      break;
  }
  return std::ranges::all_of(preconditions(a), [&](const Predicate& p) { return s.contains(p); });
}

SymbolicState apply_action(const SymbolicState& s, const SymbolicAction& a) {
  SymbolicState next = s;
  for (const Predicate& p : delete_effects(a)) next.erase(p);
  for (const Predicate& p : add_effects(a)) next.insert(p);
  return next;
}

int robot_location(const SymbolicState& s) {
  for (const Predicate& p : s) {
    if (p.kind == PredicateKind::RobotAt) return p.b;
  }
  return -1;
}

std::vector<SymbolicAction> manipulations_at(const TaskDomain& d, const SymbolicState& s, int loc) {
  std::vector<SymbolicAction> out;
  for (std::size_t o = 0; o < d.objects.size(); ++o) {
    for (ActionKind k : {ActionKind::Load, ActionKind::Unload}) {
      const SymbolicAction a{k, -1, loc, static_cast<int>(o)};
      if (applicable(d, s, a)) out.push_back(a);
    }
  }
  std::sort(out.begin(), out.end(), [](const SymbolicAction& x, const SymbolicAction& y) {
    return std::tie(x.kind, x.object) < std::tie(y.kind, y.object);
  });
  return out;
}

int distinct_unload_sides(const TaskPlan& p) {
  std::set<int> sides;
  for (const SymbolicAction& a : p.actions) {
    if (a.kind == ActionKind::Unload) sides.insert(a.location);
  }
  return static_cast<int>(sides.size());
}

}  // namespace

int default_plan_bound(int n_objects, int n_unload_sides) {
  return 2 * n_objects + 2 * n_unload_sides + 2;
}

PlanSet enumerate_satisficing_plans(const TaskDomain& domain, std::optional<int> bound) {
  PlanSet result;
  const SymbolicState initial = domain.initial_state();
  if (domain.goal_reached(initial)) {
    result.plans.push_back({});
    return result;
  }
  for (const DomainObject& o : domain.objects) {
    const DomainLocation& src = domain.locations.at(static_cast<std::size_t>(o.source));
    if (!src.reachable) {
      result.diagnostic = "unreachable location: " + src.name + " (source of " + o.id + ")";
      return result;
    }
  }
  const int n_sides = static_cast<int>(std::count_if(
      domain.locations.begin(), domain.locations.end(),
      [](const DomainLocation& l) { return l.unload_side && l.reachable; }));
  if (n_sides == 0) {
    result.diagnostic = "unreachable location: no reachable unload side";
    return result;
  }
  const int n_objects = static_cast<int>(domain.objects.size());
  const int max_len = bound.value_or(default_plan_bound(n_objects, n_sides));

  std::set<TaskPlan> found;
  TaskPlan path;
  std::function<void(const SymbolicState&)> dfs = [&](const SymbolicState& s) {
    if (domain.goal_reached(s)) {
      const int limit = bound.value_or(default_plan_bound(n_objects, distinct_unload_sides(path)));
      if (static_cast<int>(path.actions.size()) <= limit) found.insert(path);
      return;
    }
    if (static_cast<int>(path.actions.size()) >= max_len) return;
    const int here = robot_location(s);
    const SymbolicAction* last = path.actions.empty() ? nullptr : &path.actions.back();

    for (const SymbolicAction& m : manipulations_at(domain, s, here)) {
      if (last && last->is_manipulation() &&
          std::tie(m.kind, m.object) <= std::tie(last->kind, last->object)) {
        continue;
      }
      path.actions.push_back(m);
      dfs(apply_action(s, m));
      path.actions.pop_back();
    }
    if (last && last->kind == ActionKind::Navigate) return;
    for (std::size_t l = 0; l < domain.locations.size(); ++l) {
      const SymbolicAction nav = SymbolicAction::navigate(here, static_cast<int>(l));
      if (!applicable(domain, s, nav)) continue;
      const SymbolicState next = apply_action(s, nav);
      if (manipulations_at(domain, next, nav.location).empty()) continue;
      path.actions.push_back(nav);
      dfs(next);
      path.actions.pop_back();
    }
  };
  dfs(initial);

  result.plans.assign(found.begin(), found.end());
  if (result.plans.empty()) {
    result.diagnostic = "no plan within length bound " + std::to_string(max_len);
  }
  return result;
}

PlanValidation validate_plan(const TaskDomain& domain, const TaskPlan& plan,
                             const SymbolicState& initial) {
  SymbolicState s = initial;
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    if (!applicable(domain, s, plan.actions[i])) return {false, i};
    s = apply_action(s, plan.actions[i]);
  }
  return {};
}

std::string format_plan(const TaskDomain& domain, const TaskPlan& plan) {
  std::ostringstream out;
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    out << (i + 1) << ". " << domain.describe(plan.actions[i]) << "\n";
  }
  return out.str();
}

}  // namespace grop
