#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "grop/grid.hpp"
#include "grop/rng.hpp"

namespace grop {

enum class TrajectoryKind { Navigation, Manipulation };

/// Base motion as a polyline of poses. A manipulation trajectory ends at its stand pose
/// (any earlier waypoints are a base reposition) and carries the reach target.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::Navigation;
  std::vector<Pose> waypoints;
  std::optional<Vec2> target;
  // Placeholder for a leg that could not be planned; waypoints hold the straight-line estimate.
  bool gap = false;

  double length() const;
  const Pose& stand() const { return waypoints.back(); }
};

/// Gaussian execution noise on the achieved navigation goal.
struct NoiseModel {
  double sigma_pos = 0.1;    // meters, per axis
  double sigma_theta = 0.1;  // radians
  int max_resamples = 3;     // K

  static NoiseModel none() { return {0.0, 0.0, 0}; }
  bool is_zero() const { return sigma_pos == 0.0 && sigma_theta == 0.0; }
};

/// Reach model of the arm on the mobile base.
struct ArmModel {
  double reach = 0.9;                             // meters
  double heading_cone = std::numbers::pi / 2.0;   // |bearing - heading| limit
  double manipulation_cost = 0.0;                 // seconds per manipulation
};

enum class NavStatus { Ok, StartInCollision, OccupiedGoal, DisconnectedGoal };
enum class NavigationAlgorithm { AStar, Rrt };

struct NavOptions {
  NavigationAlgorithm algorithm = NavigationAlgorithm::AStar;
  bool smooth = true;
  int rrt_iterations = 20000;
  double rrt_step = 0.3;
  double rrt_goal_bias = 0.1;
};

struct NavResult {
  NavStatus status = NavStatus::Ok;
  Trajectory trajectory;
  bool ok() const { return status == NavStatus::Ok; }
};

/// Collision-free base path between two poses, or the reason there is none.
/// Blocked cells are anything not Free in `map`; the path is deterministic per seed.
NavResult plan_navigation(const GridMap& map, const Pose& start, const Pose& goal,
                          std::uint64_t seed = 0, const NavOptions& options = {});

/// Cells crossed by the closed segment [a, b]; corner crossings include both side cells.
std::vector<CellIndex> traverse_segment(const GridGeometry& geometry, const Vec2& a, const Vec2& b);

bool segment_free(const GridMap& map, const Vec2& a, const Vec2& b);

/// 8-connected (no corner cutting) reachability from `start`.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> reachable_from(const GridMap& map,
                                                                   const CellIndex& start);

enum class ExecStatus { Ok, Collision };

struct ExecResult {
  ExecStatus status = ExecStatus::Ok;
  Pose achieved;
  int attempts = 0;
  bool ok() const { return status == ExecStatus::Ok; }
};

/// Perturbs the trajectory's goal; a perturbed pose blocked in `collision_map` is redrawn,
/// at most `max_resamples` times.
ExecResult execute_navigation(const GridMap& collision_map, const Trajectory& trajectory,
                              const NoiseModel& noise, Rng& rng);

enum class ManipStatus { Ok, StandInCollision, OutOfReach, Occluded, BadHeading };

struct ManipResult {
  ManipStatus status = ManipStatus::Ok;
  Trajectory trajectory;
  bool ok() const { return status == ManipStatus::Ok; }
};

/// Reach check from `stand` to `target`. Chair cells on the segment occlude the arm;
/// table cells do not.
ManipResult plan_manipulation(const GridMap& map, const Pose& stand, const Vec2& target,
                              const ArmModel& arm = {});

/// Seconds to execute: base path length / velocity, plus the arm constant for manipulation.
double trajectory_cost(const Trajectory& trajectory, double velocity, double manipulation_cost = 0.0);

/// Distance between where the object lands and `target` when the arm is planned from
/// `planned` but executed from `achieved`. The arm re-targets from the achieved position;
/// the heading error rotates the reach vector about the base.
double placement_error(const Pose& planned, const Pose& achieved, const Vec2& target);

/// `x,y,theta` rows with a header line.
std::string trajectory_csv(const Trajectory& trajectory);

const char* to_string(NavStatus s);
const char* to_string(ManipStatus s);

}  // namespace grop
