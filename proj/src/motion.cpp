#include "grop/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "grop/world.hpp"

namespace grop {

double Trajectory::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    total += (waypoints[i].position() - waypoints[i - 1].position()).norm();
  }
  return total;
}

const char* to_string(NavStatus s) {
  switch (s) {
    case NavStatus::Ok: return "ok";
    case NavStatus::StartInCollision: return "start-in-collision";
    case NavStatus::OccupiedGoal: return "occupied-goal";
    case NavStatus::DisconnectedGoal: return "disconnected-goal";
  }
  return "?";
}

const char* to_string(ManipStatus s) {
  switch (s) {
    case ManipStatus::Ok: return "ok";
    case ManipStatus::StandInCollision: return "stand-in-collision";
    case ManipStatus::OutOfReach: return "out-of-reach";
    case ManipStatus::Occluded: return "occluded";
    case ManipStatus::BadHeading: return "bad-heading";
  }
  return "?";
}

std::vector<CellIndex> traverse_segment(const GridGeometry& g, const Vec2& a, const Vec2& b) {
  std::vector<CellIndex> cells;
  // Grid coordinates in units of cells.
  const double ax = (a.x() - g.origin.x()) / g.resolution;
  const double ay = (a.y() - g.origin.y()) / g.resolution;
  const double bx = (b.x() - g.origin.x()) / g.resolution;
  const double by = (b.y() - g.origin.y()) / g.resolution;
  int col = static_cast<int>(std::floor(ax));
  int row = static_cast<int>(std::floor(ay));
  const int end_col = static_cast<int>(std::floor(bx));
  const int end_row = static_cast<int>(std::floor(by));
  const double dx = bx - ax;
  const double dy = by - ay;
  const int step_c = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_r = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double t_delta_c = step_c != 0 ? std::abs(1.0 / dx) : inf;
  const double t_delta_r = step_r != 0 ? std::abs(1.0 / dy) : inf;
  double t_max_c = step_c > 0 ? (std::floor(ax) + 1.0 - ax) / dx
                   : step_c < 0 ? (ax - std::floor(ax)) / -dx
                                : inf;
  double t_max_r = step_r > 0 ? (std::floor(ay) + 1.0 - ay) / dy
                   : step_r < 0 ? (ay - std::floor(ay)) / -dy
                                : inf;
  cells.push_back({col, row});
  const int max_steps = std::abs(end_col - col) + std::abs(end_row - row) + 2;
  for (int i = 0; i < max_steps && (col != end_col || row != end_row); ++i) {
    constexpr double eps = 1e-12;
    if (std::abs(t_max_c - t_max_r) < eps) {
      if (t_max_c > 1.0) break;
      // Passing exactly through a corner touches both side cells.
      cells.push_back({col + step_c, row});
      cells.push_back({col, row + step_r});
      col += step_c;
      row += step_r;
      t_max_c += t_delta_c;
      t_max_r += t_delta_r;
    } else if (t_max_c < t_max_r) {
      if (t_max_c > 1.0) break;
      col += step_c;
      t_max_c += t_delta_c;
    } else {
      if (t_max_r > 1.0) break;
      row += step_r;
      t_max_r += t_delta_r;
    }
    cells.push_back({col, row});
  }
  return cells;
}

bool segment_free(const GridMap& map, const Vec2& a, const Vec2& b) {
  for (const CellIndex& c : traverse_segment(map.geometry(), a, b)) {
    if (map.blocked(c)) return false;
  }
  return true;
}

namespace {

constexpr int kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

bool can_step(const GridMap& map, const CellIndex& from, int dc, int dr) {
  const CellIndex to{from.col + dc, from.row + dr};
  if (map.blocked(to)) return false;
  if (dc != 0 && dr != 0) {
    if (map.blocked(CellIndex{from.col + dc, from.row}) ||
        map.blocked(CellIndex{from.col, from.row + dr})) {
      return false;
    }
  }
  return true;
}

std::vector<CellIndex> astar(const GridMap& map, const CellIndex& start, const CellIndex& goal) {
  const int w = map.width();
  const int h = map.height();
  const auto index = [w](const CellIndex& c) { return static_cast<std::size_t>(c.row) * w + c.col; };
  const auto heuristic = [&](const CellIndex& c) {
    const double dx = std::abs(c.col - goal.col);
    const double dy = std::abs(c.row - goal.row);
    return std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy);
  };
  std::vector<double> g(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(g.size(), -1);
  std::vector<bool> closed(g.size(), false);
  // (f, insertion order, cell) keeps expansion order deterministic.
  using Entry = std::tuple<double, std::uint64_t, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::uint64_t counter = 0;
  g[index(start)] = 0.0;
  open.emplace(heuristic(start), counter++, start.col, start.row);
  while (!open.empty()) {
    const auto [f, order, col, row] = open.top();
    open.pop();
    const CellIndex cur{col, row};
    const std::size_t ci = index(cur);
    if (closed[ci]) continue;
    closed[ci] = true;
    if (cur == goal) break;
    for (const auto& d : kDirs) {
      if (!can_step(map, cur, d[0], d[1])) continue;
      const CellIndex nxt{col + d[0], row + d[1]};
      const std::size_t ni = index(nxt);
      if (closed[ni]) continue;
      const double step = (d[0] != 0 && d[1] != 0) ? std::sqrt(2.0) : 1.0;
      if (g[ci] + step < g[ni]) {
        g[ni] = g[ci] + step;
        parent[ni] = static_cast<std::int64_t>(ci);
        open.emplace(g[ni] + heuristic(nxt), counter++, nxt.col, nxt.row);
      }
    }
  }
  if (!closed[index(goal)]) return {};
  std::vector<CellIndex> path;
  for (std::int64_t i = static_cast<std::int64_t>(index(goal)); i >= 0; i = parent[i]) {
    path.push_back({static_cast<int>(i % w), static_cast<int>(i / w)});
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Vec2> rrt(const GridMap& map, const Vec2& start, const Vec2& goal, std::uint64_t seed,
                      const NavOptions& opt) {
  Rng rng(derive_seed(seed, {0x4447}));
  const GridGeometry& g = map.geometry();
  std::uniform_real_distribution<double> ux(g.origin.x(), g.origin.x() + g.width * g.resolution);
  std::uniform_real_distribution<double> uy(g.origin.y(), g.origin.y() + g.height * g.resolution);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Vec2> nodes{start};
  std::vector<int> parent{-1};
  if (segment_free(map, start, goal)) return {start, goal};
  for (int it = 0; it < opt.rrt_iterations; ++it) {
    const Vec2 sample = coin(rng) < opt.rrt_goal_bias ? goal : Vec2(ux(rng), uy(rng));
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double d = (nodes[i] - sample).squaredNorm();
      if (d < best) {
        best = d;
        nearest = i;
      }
    }
    Vec2 dir = sample - nodes[nearest];
    const double len = dir.norm();
    if (len < 1e-9) continue;
    const Vec2 next = len > opt.rrt_step ? Vec2(nodes[nearest] + dir / len * opt.rrt_step) : sample;
    if (!segment_free(map, nodes[nearest], next)) continue;
    nodes.push_back(next);
    parent.push_back(static_cast<int>(nearest));
    if (segment_free(map, next, goal)) {
      std::vector<Vec2> path{goal};
      for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; i = parent[static_cast<std::size_t>(i)]) {
        path.push_back(nodes[static_cast<std::size_t>(i)]);
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
  }
  return {};
}

std::vector<Vec2> shortcut(const GridMap& map, const std::vector<Vec2>& points) {
  if (points.size() <= 2) return points;
  std::vector<Vec2> out{points.front()};
  std::size_t i = 0;
  while (i + 1 < points.size()) {
    std::size_t j = points.size() - 1;
    while (j > i + 1 && !segment_free(map, points[i], points[j])) --j;
    out.push_back(points[j]);
    i = j;
  }
  return out;
}

Trajectory to_trajectory(const std::vector<Vec2>& points, const Pose& start, const Pose& goal) {
  Trajectory t;
  t.kind = TrajectoryKind::Navigation;
  t.waypoints.push_back(start);
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    t.waypoints.emplace_back(points[i], bearing(points[i], points[i + 1]));
  }
  t.waypoints.push_back(goal);
  return t;
}

}  // namespace

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> reachable_from(const GridMap& map,
                                                                   const CellIndex& start) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(map.height(), map.width(), false);
  if (map.blocked(start)) return seen;
  std::vector<CellIndex> stack{start};
  seen(start.row, start.col) = true;
  while (!stack.empty()) {
    const CellIndex cur = stack.back();
    stack.pop_back();
    for (const auto& d : kDirs) {
      if (!can_step(map, cur, d[0], d[1])) continue;
      const CellIndex nxt{cur.col + d[0], cur.row + d[1]};
      if (seen(nxt.row, nxt.col)) continue;
      seen(nxt.row, nxt.col) = true;
      stack.push_back(nxt);
    }
  }
  return seen;
}

NavResult plan_navigation(const GridMap& map, const Pose& start, const Pose& goal,
                          std::uint64_t seed, const NavOptions& options) {
  NavResult result;
  const CellIndex sc = map.to_cell(start.position());
  const CellIndex gc = map.to_cell(goal.position());
  if (map.blocked(sc)) {
    result.status = NavStatus::StartInCollision;
    return result;
  }
  if (map.blocked(gc)) {
    result.status = NavStatus::OccupiedGoal;
    return result;
  }
  if (start.position() == goal.position() ||
      (sc == gc && segment_free(map, start.position(), goal.position()))) {
    result.trajectory = to_trajectory({start.position(), goal.position()}, start, goal);
    return result;
  }

  std::vector<Vec2> points;
  if (options.algorithm == NavigationAlgorithm::AStar) {
    const std::vector<CellIndex> cells = astar(map, sc, gc);
    if (cells.empty()) {
      result.status = NavStatus::DisconnectedGoal;
      return result;
    }
    points.push_back(start.position());
    for (std::size_t i = 1; i + 1 < cells.size(); ++i) points.push_back(map.to_world(cells[i]));
    points.push_back(goal.position());
  } else {
    if (!reachable_from(map, sc)(gc.row, gc.col)) {
      result.status = NavStatus::DisconnectedGoal;
      return result;
    }
    points = rrt(map, start.position(), goal.position(), seed, options);
    if (points.empty()) {
      result.status = NavStatus::DisconnectedGoal;
      return result;
    }
  }
  if (options.smooth) points = shortcut(map, points);
  result.trajectory = to_trajectory(points, start, goal);
  return result;
}

ExecResult execute_navigation(const GridMap& collision_map, const Trajectory& trajectory,
                              const NoiseModel& noise, Rng& rng) {
  if (trajectory.waypoints.empty()) throw std::invalid_argument("trajectory has no waypoints");
  if (noise.sigma_pos < 0.0 || noise.sigma_theta < 0.0 || noise.max_resamples < 0) {
    throw std::invalid_argument("noise parameters must be non-negative");
  }
  const Pose& goal = trajectory.waypoints.back();
  ExecResult result;
  if (noise.is_zero()) {
    result.achieved = goal;
    result.attempts = 1;
    result.status = collision_map.blocked(goal.position()) ? ExecStatus::Collision : ExecStatus::Ok;
    return result;
  }
  std::normal_distribution<double> pos(0.0, noise.sigma_pos > 0.0 ? noise.sigma_pos : 1.0);
  std::normal_distribution<double> rot(0.0, noise.sigma_theta > 0.0 ? noise.sigma_theta : 1.0);
  for (int attempt = 0; attempt <= noise.max_resamples; ++attempt) {
    const double dx = noise.sigma_pos > 0.0 ? pos(rng) : 0.0;
    const double dy = noise.sigma_pos > 0.0 ? pos(rng) : 0.0;
    const double dt = noise.sigma_theta > 0.0 ? rot(rng) : 0.0;
    result.achieved = Pose(goal.x + dx, goal.y + dy, goal.theta + dt);
    result.attempts = attempt + 1;
    if (!collision_map.blocked(result.achieved.position())) {
      result.status = ExecStatus::Ok;
      return result;
    }
  }
  result.status = ExecStatus::Collision;
  return result;
}

ManipResult plan_manipulation(const GridMap& map, const Pose& stand, const Vec2& target,
                              const ArmModel& arm) {
  ManipResult result;
  result.trajectory.kind = TrajectoryKind::Manipulation;
  result.trajectory.waypoints = {stand};
  result.trajectory.target = target;
  if (map.blocked(stand.position())) {
    result.status = ManipStatus::StandInCollision;
  } else if ((target - stand.position()).norm() > arm.reach) {
    result.status = ManipStatus::OutOfReach;
  } else if (std::ranges::any_of(traverse_segment(map.geometry(), stand.position(), target),
                                 [&](const CellIndex& c) { return map.is_chair(c); })) {
    result.status = ManipStatus::Occluded;
  } else if (target != stand.position() &&
             std::abs(normalize_angle(bearing(stand.position(), target) - stand.theta)) >
                 arm.heading_cone) {
    result.status = ManipStatus::BadHeading;
  }
  return result;
}

double trajectory_cost(const Trajectory& trajectory, double velocity, double manipulation_cost) {
  if (!(velocity > 0.0)) throw std::invalid_argument("velocity must be positive");
  double cost = trajectory.length() / velocity;
  if (trajectory.kind == TrajectoryKind::Manipulation) cost += manipulation_cost;
  return cost;
}

double placement_error(const Pose& planned, const Pose& achieved, const Vec2& target) {
  const double reach = (target - achieved.position()).norm();
  const double heading_error = normalize_angle(achieved.theta - planned.theta);
  return 2.0 * reach * std::sin(0.5 * std::abs(heading_error));
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  out << "x,y,theta\n";
  for (const Pose& p : trajectory.waypoints) {
    out << format_number(p.x) << "," << format_number(p.y) << "," << format_number(p.theta) << "\n";
  }
  return out.str();
}

}  // namespace grop
