#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "grop/heatmap.hpp"
#include "grop/motion.hpp"
#include "grop/world.hpp"

namespace grop {

/// Everything that decides whether a navigate-then-unload trial succeeds.
struct TrialParams {
  NoiseModel noise;
  ArmModel arm;
  double tolerance = 0.1;  // max distance between placed object and target, meters
  FrameSpec frame;
};

enum class TrialFailure {
  None,
  OccupiedGoal,          // stand cell is an obstacle
  UnreachableGoal,       // no navigation path
  NominalManipulation,   // the unload cannot even be planned from the intended stand
  NavigationCollision,   // every perturbed pose hit static structure
  BumpedChair,           // achieved pose inside a chair
  Manipulation,          // unload infeasible from the achieved pose
  Placement,             // object landed outside tolerance
};

struct TrialOutcome {
  bool success = false;
  TrialFailure reason = TrialFailure::None;
};

const char* to_string(TrialFailure f);

/// Stand pose for map cell `x`: its center, facing `target`.
Pose stand_pose(const GridMap& map, const CellIndex& x, const Vec2& target);

/// Seed of trial `k` at map cell `x` under `seed`.
std::uint64_t trial_seed(std::uint64_t seed, const CellIndex& x, int k);

/// Navigate from the environment's start to map cell `x`, then unload onto `target`.
///
/// Chairs are movable obstacles: the noisy pose is only redrawn when it lands in static
/// structure (tables, walls); ending up inside a chair fails the trial. With common seeds
/// this makes the outcome monotone in the chair set.
TrialOutcome run_trial(const Environment& env, const CellIndex& x, const Vec2& target,
                       std::uint64_t seed, const TrialParams& params = {});

/// Frame cell (of the image centered on `target`) to map cell.
CellIndex frame_to_map(const GridMap& map, const FrameSpec& frame, const Vec2& target,
                       const CellIndex& frame_cell);

/// Geometry of the frame centered on `target` inside `map`.
GridGeometry frame_geometry(const GridMap& map, const FrameSpec& frame, const Vec2& target);

struct CellOutcome {
  CellIndex frame_cell;
  int trial = 0;
  bool success = false;
};

struct HeatmapCollection {
  Heatmap heatmap;
  std::vector<CellOutcome> outcomes;  // lattice order, trials inner
};

/// Monte-Carlo heatmap: `trials` runs per lattice cell, value = success fraction.
HeatmapCollection collect_heatmap(const Environment& env, const Vec2& target, int trials,
                                  std::uint64_t seed, const TrialParams& params = {});

struct TrialRecord {
  int task = 0;
  CellIndex frame_cell;
  int trial = 0;
  bool outcome = false;
};

struct DatasetTask {
  int environment = 0;
  Vec2 target = Vec2::Zero();
};

struct LabeledImage {
  GridMap image;
  Heatmap heatmap;
};

struct Dataset {
  std::vector<SceneSpec> environments;
  std::vector<DatasetTask> tasks;
  std::vector<TrialRecord> records;
  std::vector<LabeledImage> labels;  // one per task
  int trials_per_cell = 5;
  std::uint64_t seed = 0;
  FrameSpec frame;
};

struct DatasetOptions {
  int environments = 10;
  int tasks_per_environment = 10;
  int trials_per_cell = 5;
  ChairRange chairs;
  TrialParams trial;
  int threads = 1;
};

/// Random environments, random unload targets and a labeled heatmap for each.
/// Identical for any thread count.
Dataset build_dataset(const DatasetOptions& options, std::uint64_t master_seed);

/// Malformed or inconsistent files on disk.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `records.csv`, `manifest.json`, `envs/*.scene` and `heatmaps/*.pgm` into `dir`.
void save_dataset(const Dataset& d, const std::filesystem::path& dir);
/// Rebuilds images and labels from the files written by `save_dataset`.
Dataset load_dataset(const std::filesystem::path& dir);

/// Motion-level feasibility: heatmap lookup at a frame cell.
double fea_m(const Heatmap& h, const CellIndex& frame_cell);

class ZeroMassError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws stand positions inside a location with probability proportional to the heatmap.
class StandSampler {
 public:
  StandSampler(const SymbolicLocation& location, const Heatmap& heatmap);

  bool has_mass() const { return total_ > 0.0; }
  /// Sample `i` of the stream `seed`: a lattice cell center facing the target.
  /// Throws ZeroMassError when no cell of the location carries feasibility.
  Pose draw(std::uint64_t i, std::uint64_t seed, CellIndex* frame_cell = nullptr) const;
  const std::vector<CellIndex>& cells() const { return cells_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  const Heatmap* heatmap_;
  std::vector<CellIndex> cells_;
  std::vector<double> weights_;
  double total_ = 0.0;
};

Pose smp(const SymbolicLocation& location, const Heatmap& h, std::uint64_t i, std::uint64_t seed);

/// Task-level feasibility of navigating to `location` and manipulating there: mean of
/// heatmap values at `samples` heatmap-weighted draws. Zero when the location has no mass.
double fea_t(const SymbolicLocation& location, const Heatmap& h, int samples, std::uint64_t seed);

/// Long format: `col,row,x,y,feasibility` for each lattice cell.
std::string heatmap_csv(const Heatmap& h);
std::string heatmap_pgm(const Heatmap& h);
/// Occupancy crop with the heatmap blended over free cells.
std::string overlay_pgm(const GridMap& image, const Heatmap& h);

/// Heatmap source backed by Monte-Carlo trials (seeded per target).
HeatmapFn oracle_heatmaps(int trials, std::uint64_t seed, const TrialParams& params = {});

}  // namespace grop
