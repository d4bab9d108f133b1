#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "grop/feasibility.hpp"
#include "grop/motion.hpp"
#include "grop/taskplan.hpp"

namespace grop {

/// How per-pair task-level feasibilities combine into F(p).
enum class Aggregation { Product, Sum, Mean };

const char* to_string(Aggregation a);
Aggregation parse_aggregation(const std::string& s);

struct PlannerConfig {
  double bonus = 40.0;     // R
  double velocity = 0.4;   // m/s
  Aggregation aggregation = Aggregation::Product;
  int samples = 5;         // draws per task-level feasibility estimate
  std::uint64_t seed = 0;
  ArmModel arm;
};

/// U = R * F - C.
inline double utility(double feasibility, double cost, double bonus) { return bonus * feasibility - cost; }

/// One manipulation action and the navigation that brought the robot there (if any).
struct PairGrounding {
  std::optional<std::size_t> navigate;  // action index
  std::size_t manipulation = 0;         // action index
  int location = -1;
  int object = -1;
  Pose stand;
  double feasibility = 1.0;  // task-level estimate; 1 for unevaluated loads
  double cost = 0.0;         // seconds for both actions
  bool evaluated = false;    // contributes to F(p)
  bool gap = false;
};

struct TaskMotionPlan {
  TaskPlan task_plan;
  std::vector<Trajectory> motion_plan;  // one per task action
  std::vector<Pose> positions;          // X^seq, starting at the initial pose
  std::vector<PairGrounding> pairs;
  double feasibility = 0.0;
  double cost = 0.0;
  double utility = 0.0;

  bool has_gaps() const;
};

double aggregate(const std::vector<double>& values, Aggregation mode);

/// Where navigation goals come from when grounding a plan.
enum class StandPolicy {
  Heatmap,  // heatmap-weighted draws
  Uniform,  // uniform over free, reachable lattice cells of the location
};

class UnsolvableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Grounds task plans of one task in one environment. Heatmaps, stand draws and
/// navigation legs are cached, so plans that share a (object, side) choice share its
/// grounding.
class Grounder {
 public:
  Grounder(const Environment& env, const TaskSpec& task, HeatmapFn heatmaps, PlannerConfig config);

  const Environment& environment() const { return env_; }
  const TaskSpec& task() const { return task_; }
  const TaskDomain& domain() const { return domain_; }
  const std::vector<SymbolicLocation>& locations() const { return locations_; }
  const PlannerConfig& config() const { return config_; }

  const Heatmap& heatmap(int object);
  /// Task-level feasibility of unloading `object` from `location`.
  double side_feasibility(int object, int location);

  /// Throws std::invalid_argument if a navigation is not followed by a manipulation at its
  /// destination.
  TaskMotionPlan ground(const TaskPlan& plan, StandPolicy policy = StandPolicy::Heatmap,
                        std::uint64_t stand_seed = 0);

 private:
  struct Stand {
    Pose pose;
    bool gap = false;
  };
  Stand stand_for(const SymbolicAction& a, StandPolicy policy, std::uint64_t stand_seed);
  Trajectory leg(const Pose& from, const Pose& to);
  Vec2 action_target(const SymbolicAction& a) const;

  const Environment& env_;
  TaskSpec task_;
  HeatmapFn heatmaps_;
  PlannerConfig config_;
  std::vector<SymbolicLocation> locations_;
  TaskDomain domain_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> reachable_;
  std::vector<std::optional<Heatmap>> heatmap_cache_;
  std::map<std::pair<int, int>, double> feasibility_cache_;
  std::map<std::array<std::uint64_t, 4>, Stand> stand_cache_;
  std::map<std::array<double, 6>, Trajectory> leg_cache_;
};

/// Index of the maximum-utility plan under bonus `bonus`; ties go to the lower cost, then
/// to the earlier plan.
std::size_t select_plan(const std::vector<TaskMotionPlan>& candidates, double bonus);

/// Recomputes U of every candidate for a new bonus.
void rescore(std::vector<TaskMotionPlan>& candidates, double bonus);

struct PlanningResult {
  TaskDomain domain;
  std::vector<TaskMotionPlan> candidates;  // canonical task-plan order
  std::size_t selected = 0;
  std::string planner = "grop";

  const TaskMotionPlan& best() const { return candidates.at(selected); }
};

/// Enumerates the satisficing task plans and grounds each of them.
PlanningResult ground_candidates(Grounder& grounder);

/// Grounds every satisficing plan and returns the maximum-utility one.
PlanningResult grop_plan(const Environment& env, const TaskSpec& task, const HeatmapFn& heatmaps,
                         const PlannerConfig& config);

struct TargetOutcome {
  int object = -1;
  bool success = false;
  std::string reason;
};

struct ExecutionReport {
  std::vector<TargetOutcome> targets;
  double realized_time = 0.0;  // seconds

  int successes() const;
};

struct ExecutionOptions {
  NoiseModel noise;
  double tolerance = 0.1;
  double velocity = 0.4;
  ArmModel arm;
  /// When false a plan with trajectory gaps is rejected; otherwise the affected targets fail.
  bool allow_gaps = false;
};

/// Simulates the plan: each base motion is re-planned from the achieved pose and executed
/// with noise, each unload is checked for reach and placement tolerance.
ExecutionReport execute_plan(const TaskMotionPlan& plan, const Environment& env, const TaskSpec& task,
                             const ExecutionOptions& options, std::uint64_t seed);

/// JSON with per-pair (side, stand, feasibility, leg cost), totals and the selected marker.
std::string plan_report_json(const PlanningResult& result);

}  // namespace grop
