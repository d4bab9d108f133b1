#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grop/grid.hpp"
#include "grop/heatmap.hpp"

namespace grop {

struct Table {
  std::string name;
  Rect rect;
  bool operator==(const Table&) const = default;
};

/// Chair footprint: axis-aligned rectangle around `center`.
struct Chair {
  Vec2 center = Vec2::Zero();
  double width = 0.5;
  double depth = 0.5;

  Rect footprint() const {
    return {center.x() - 0.5 * width, center.y() - 0.5 * depth, center.x() + 0.5 * width,
            center.y() + 0.5 * depth};
  }
  bool operator==(const Chair&) const = default;
};

struct PlacedObject {
  std::string id;
  Vec2 position = Vec2::Zero();
  bool operator==(const PlacedObject&) const = default;
};

/// Declarative scene description; `build_environment` turns it into an Environment.
struct SceneSpec {
  double room_width = 12.0;
  double room_height = 8.0;
  double resolution = 0.1;
  std::vector<Table> tables;
  std::vector<Chair> chairs;
  std::vector<PlacedObject> objects;
  Pose start;
  std::string unload_table = "banquet";
  std::string loading_table = "loading";
  bool operator==(const SceneSpec&) const = default;
};

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PlacementError : public SceneError {
 public:
  PlacementError(const std::string& what, int attempts) : SceneError(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

/// Immutable scene: the declarative spec plus its rasterized occupancy.
class Environment {
 public:
  const SceneSpec& spec() const { return spec_; }
  const GridMap& map() const { return map_; }
  /// Tables and walls only; used where chairs are treated as movable obstacles.
  const GridMap& static_map() const { return static_map_; }
  const std::vector<Table>& tables() const { return spec_.tables; }
  const std::vector<Chair>& chairs() const { return spec_.chairs; }
  const std::vector<PlacedObject>& objects() const { return spec_.objects; }
  const Table& unload_table() const;
  const Table& loading_table() const;
  const Pose& start() const { return spec_.start; }

  /// Copy of this scene with one more chair; throws SceneError if it does not fit.
  Environment with_chair(const Chair& chair) const;
  /// Copy of this scene with chair `index` removed.
  Environment without_chair(std::size_t index) const;

 private:
  friend Environment build_environment(const SceneSpec& spec);
  SceneSpec spec_;
  GridMap map_;
  GridMap static_map_;
};

/// Long banquet table centered in the room, loading table and robot dock to the south-west.
SceneSpec benchmark_scene();

Environment build_environment(const SceneSpec& spec);

struct ChairRange {
  int min = 4;
  int max = 10;
};

/// Places a uniform-random number of chairs near the unloading table; deterministic per seed.
Environment random_environment(std::uint64_t seed, ChairRange range = {},
                               const SceneSpec& base = benchmark_scene());

/// Occupancy crop of `width` x `height` cells whose center cell contains `center`.
GridMap render_topdown(const Environment& env, const Vec2& center, int width = 64, int height = 32);

/// A symbolic place the robot can be at: a set of obstacle-free cells.
struct SymbolicLocation {
  std::string name;
  std::vector<CellIndex> region;  // sorted map cells
  GridGeometry grid;              // geometry of the map the region indexes
  bool unload_side = false;       // objects may be unloaded onto the banquet table from here
  bool fixed_stand = false;       // manipulation always happens from `stand`
  Pose stand;

  bool reachable() const { return !region.empty(); }
  bool contains(const CellIndex& c) const;
  bool contains(const Vec2& p) const { return contains(grid.to_cell(p)); }
};

/// Width of the free band that makes up each side location, meters.
inline constexpr double kSideBand = 1.2;
/// Width of the free band around the loading table, meters.
inline constexpr double kLoadingBand = 0.6;

/// `loading`, then `north`, `south`, `east`, `west` of the unloading table.
std::vector<SymbolicLocation> symbolic_locations(const Environment& env);

struct ObjectMove {
  std::string object_id;
  std::string source;  // symbolic location name
  Vec2 target = Vec2::Zero();
  bool operator==(const ObjectMove&) const = default;
};

struct TaskSpec {
  std::vector<ObjectMove> moves;
  Pose start;
  bool operator==(const TaskSpec&) const = default;
};

/// Throws SceneError if a target is off the unloading table or an object is unknown.
void validate_task(const Environment& env, const TaskSpec& task);

/// `n_targets` well-separated unload targets on the banquet table, objects from the loading table.
TaskSpec random_task(const Environment& env, std::uint64_t seed, int n_targets = 3);

using HeatmapFn = std::function<Heatmap(const Environment&, const Vec2&)>;

/// Number of stand cells whose feasibility reaches `threshold`, summed over the task's targets.
/// Larger is easier; zero means every target is blocked.
double task_difficulty(const Environment& env, const TaskSpec& task, const HeatmapFn& heatmap_of,
                       double threshold = 0.5);

// Text formats (versioned with a `format: 1` header).
std::string write_scene(const SceneSpec& spec);
SceneSpec parse_scene(const std::string& text);
std::string write_task(const TaskSpec& task);
TaskSpec parse_task(const std::string& text);

/// Shortest round-trip decimal representation.
std::string format_number(double v);

}  // namespace grop
