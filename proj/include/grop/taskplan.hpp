#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "grop/world.hpp"

namespace grop {

enum class ActionKind { Navigate, Load, Unload };

/// Ground STRIPS action over location and object indices of a TaskDomain.
struct SymbolicAction {
  ActionKind kind = ActionKind::Navigate;
  int from = -1;      // navigate: source location
  int location = -1;  // navigate: destination; load/unload: where it happens
  int object = -1;    // load/unload

  static SymbolicAction navigate(int from, int to) { return {ActionKind::Navigate, from, to, -1}; }
  static SymbolicAction load(int object, int location) { return {ActionKind::Load, -1, location, object}; }
  static SymbolicAction unload(int object, int location) {
    return {ActionKind::Unload, -1, location, object};
  }
  bool is_manipulation() const { return kind != ActionKind::Navigate; }
  auto operator<=>(const SymbolicAction&) const = default;
};

enum class PredicateKind { RobotAt, ObjectAt, InHand, Placed };

struct Predicate {
  PredicateKind kind;
  int a = -1;  // object (or -1 for the robot)
  int b = -1;  // location
  auto operator<=>(const Predicate&) const = default;
};

using SymbolicState = std::set<Predicate>;

struct DomainLocation {
  std::string name;
  bool reachable = true;
  bool unload_side = false;
};

struct DomainObject {
  std::string id;
  int source = -1;  // location index
};

/// Task description: locations, objects and where the robot starts.
struct TaskDomain {
  std::vector<DomainLocation> locations;
  std::vector<DomainObject> objects;
  int robot_start = 0;
  int capacity = 0;  // objects in hand at once; 0 means unlimited

  int location_index(const std::string& name) const;
  SymbolicState initial_state() const;
  /// Every object placed.
  bool goal_reached(const SymbolicState& s) const;
  std::string describe(const SymbolicAction& a) const;
};

/// Task domain for `task` over the symbolic locations of `env`. The robot starts at the
/// location whose region holds the start pose.
TaskDomain make_task_domain(const Environment& env, const std::vector<SymbolicLocation>& locations,
                            const TaskSpec& task);

std::set<Predicate> preconditions(const SymbolicAction& a);
std::set<Predicate> add_effects(const SymbolicAction& a);
std::set<Predicate> delete_effects(const SymbolicAction& a);

struct TaskPlan {
  std::vector<SymbolicAction> actions;
  auto operator<=>(const TaskPlan&) const = default;
};

struct PlanSet {
  std::vector<TaskPlan> plans;  // canonical order
  std::string diagnostic;       // set when `plans` is empty
};

/// 2 * objects + 2 * distinct unload sides + 2.
int default_plan_bound(int n_objects, int n_unload_sides);

/// All interleaved plans that place every object, within the length bound.
///
/// Plans are canonical: each navigation is immediately followed by a manipulation at its
/// destination, and manipulations performed back-to-back at one location are listed in
/// ascending (kind, object) order. With `bound` unset each plan is held to
/// `default_plan_bound(objects, distinct unload sides it uses)`.
PlanSet enumerate_satisficing_plans(const TaskDomain& domain, std::optional<int> bound = {});

struct PlanValidation {
  bool ok = true;
  std::size_t violated_step = 0;
};

/// Steps preconditions/effects; reports the first action that cannot be applied.
PlanValidation validate_plan(const TaskDomain& domain, const TaskPlan& plan,
                             const SymbolicState& initial);

/// Numbered, one action per line.
std::string format_plan(const TaskDomain& domain, const TaskPlan& plan);

}  // namespace grop
