#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grop/baselines.hpp"
#include "grop/evaluator.hpp"

namespace grop {

struct BenchmarkConfig {
  int environments = 30;
  int tasks_per_environment = 3;
  int targets_per_task = 3;
  std::vector<std::string> planners{"grop", "satisficing", "petlon", "dvh", "fcn"};
  std::vector<double> velocities{0.4};
  std::uint64_t seed = 1;
  ChairRange chairs;
  NoiseModel noise;
  ArmModel arm;
  double tolerance = 0.1;
  double bonus = 40.0;
  int samples = 5;
  Aggregation aggregation = Aggregation::Product;
  int oracle_trials = 5;
  double difficulty_threshold = 0.5;
  bool overlays = true;

  /// Throws std::invalid_argument on inconsistent values.
  void validate() const;
};

/// Keys as in BenchmarkConfig; unknown keys are rejected.
BenchmarkConfig parse_benchmark_config(const std::string& json_text);

/// One (environment, task, planner, velocity) execution.
struct RawRow {
  int environment = 0;
  int task = 0;  // within the environment
  std::string planner;
  double velocity = 0.0;
  double difficulty = 0.0;
  std::string group;
  long plan = -1;     // candidate index; -1 when the task was unsolvable
  std::string sides;  // unload side per target, '|'-separated
  double feasibility = 0.0;
  double cost = 0.0;
  double utility = 0.0;
  int targets = 0;
  int successes = 0;
  double time = 0.0;  // realized seconds
};

struct MetricsRow {
  std::string planner;
  std::string group;  // easy | normal | hard | all
  double velocity = 0.0;
  int tasks = 0;
  int targets = 0;
  int successes = 0;
  double completion_rate = 0.0;
  double mean_time = 0.0;
  double mean_utility = 0.0;
  double mean_feasibility = 0.0;
};

struct Overlay {
  std::string name;
  GridMap image;
  Heatmap heatmap;
};

struct BenchmarkResult {
  std::vector<RawRow> raw;
  std::vector<MetricsRow> metrics;
  std::vector<Overlay> overlays;
};

/// Group labels for tasks ranked by difficulty: the easiest third first. Sizes differ by at
/// most one.
std::vector<std::string> difficulty_terciles(const std::vector<double>& difficulty);

/// Plans and executes every (environment, task, planner, velocity). Planning heatmaps come
/// from `evaluator` when given, otherwise from Monte-Carlo trials; difficulty always uses
/// the trials.
BenchmarkResult run_benchmark(const BenchmarkConfig& config, const Evaluator* evaluator = nullptr);

/// Per (velocity, planner, group) aggregates in configuration order.
std::vector<MetricsRow> aggregate_metrics(const std::vector<RawRow>& raw, const std::vector<std::string>& planners);

std::string raw_csv(const std::vector<RawRow>& rows);
std::vector<RawRow> parse_raw_csv(const std::string& text);
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string summary_text(const std::vector<MetricsRow>& rows);

/// Writes `metrics.csv`, `raw.csv`, `summary.txt` and `overlays/*.pgm`.
void emit_reports(const BenchmarkResult& result, const std::filesystem::path& dir);

// Scripted two-sided scenarios.

struct ScenarioSide {
  std::string name;
  double feasibility = 0.0;
  double distance = 0.0;  // meters from the loading dock
};

struct Scenario {
  std::string name;
  double bonus = 40.0;
  double velocity = 0.6;
  std::vector<ScenarioSide> sides;
};

Scenario builtin_scenario(const std::string& name);
Scenario parse_scenario(const std::string& text);
std::string write_scenario(const Scenario& s);

struct ReplayRow {
  std::string side;
  double feasibility = 0.0;
  double distance = 0.0;
  double cost = 0.0;
  double utility = 0.0;
};

struct ReplayReport {
  std::string scenario;
  std::vector<ReplayRow> rows;
  std::string selected;
  PlanningResult planning;
};

/// Grounds one-object plans whose legs are straight runs of the configured distances and
/// whose sides carry the configured feasibility, then selects with the planner's rule.
PlanningResult ground_scripted(const Scenario& s, const PlannerConfig& config);

ReplayReport replay_scenario(const Scenario& s, std::optional<double> bonus = {},
                             std::optional<double> velocity = {});
std::string replay_text(const ReplayReport& r);

struct SwitchPoint {
  double velocity = 0.0;
  std::string grop;
  std::string petlon;
  std::string dvh;
  double grop_feasibility = 0.0;
};

struct SwitchingSweep {
  double predicted = 0.0;  // Δdistance / (R ΔF)
  std::optional<double> observed;  // first grid velocity choosing the far side
  double step = 0.0;
  std::vector<SwitchPoint> points;
};

/// Sweeps velocity over [lo, hi] on the two-sided scenario `s` (near side first).
SwitchingSweep switching_sweep(const Scenario& s, double lo = 0.2, double hi = 0.8, double step = 0.02);

struct VelocitySweep {
  BenchmarkResult benchmark;
  SwitchingSweep switching;
};

/// Benchmark at every configured velocity plus the constructed switching scenario.
VelocitySweep velocity_sweep(const BenchmarkConfig& config, const Evaluator* evaluator = nullptr);

}  // namespace grop
