// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>

#include "grop/harness.hpp"

using namespace grop;

namespace {

constexpr std::uint64_t kSeed = 1;

// Tolerances and budgets.
constexpr double kUtilityTol = 0.005;
constexpr double kCostTol = 0.01;
constexpr double kReplayBudget = 1.0;      // s
constexpr double kCollectBudget = 600.0;   // s
constexpr double kEstimatorTol = 0.02;
constexpr double kMaeBar = 0.15;
constexpr double kBenchBudget = 900.0;     // s
constexpr int kPairedEnvironments = 100;
constexpr int kReductionTasks = 50;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

Trajectory straight(double length) {
  Trajectory t;
  t.waypoints = {Pose(0, 0), Pose(length, 0)};
  return t;
}

void utility_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const double u1 = utility(0.377, 7.5, 40), u2 = utility(0.721, 19.3, 40), u3 = utility(0.520, 7.5, 40);
  const std::string s1 = replay_scenario(builtin_scenario("t1")).selected;
  const std::string s2 = replay_scenario(builtin_scenario("t2")).selected;
  const double t = seconds_since(t0);
  const bool ok = std::abs(u1 - 7.58) <= kUtilityTol && std::abs(u2 - 9.54) <= kUtilityTol &&
                  std::abs(u3 - 13.30) <= kUtilityTol && s1 == "east" && s2 == "south" && t < kReplayBudget;
  report(1, ok, fmt("U = %.4f %.4f %.4f, ", u1, u2, u3) + "t1 -> " + s1 + ", t2 -> " + s2 + fmt(", %.3f s", t));
}

void cost_model() {
  const double c1 = trajectory_cost(straight(4.5), 0.6);
  const double c2 = trajectory_cost(straight(11.6), 0.6);
  report(2, c1 == 7.5 && std::abs(c2 - 19.33) <= kCostTol, fmt("C(4.5 m) = %.17g s, C(11.6 m) = %.4f s", c1, c2));
}

Dataset dataset_bookkeeping() {
  const auto t0 = std::chrono::steady_clock::now();
  DatasetOptions opt;
  opt.threads = 1;
  Dataset d = build_dataset(opt, kSeed);
  const double t = seconds_since(t0);
  const auto dir = std::filesystem::temp_directory_path() / "grop_acceptance_dataset";
  std::filesystem::remove_all(dir);
  save_dataset(d, dir);
  const Dataset back = load_dataset(dir);
  std::filesystem::remove_all(dir);
  const bool ok = d.labels.size() == 100 && d.records.size() == 96000 && back.labels.size() == 100 &&
                  back.records.size() == 96000 && t < kCollectBudget;
  report(3, ok, fmt("%.0f labeled images, %.0f trial records, %.2f s", static_cast<double>(d.labels.size()),
                    static_cast<double>(d.records.size()), t));
  return d;
}

void estimator() {
  const FrameSpec frame;
  GridGeometry g{Vec2::Zero(), 0.1, frame.width, frame.height};
  SymbolicLocation everywhere;
  everywhere.grid = g;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) everywhere.region.push_back({col, row});
  }
  std::sort(everywhere.region.begin(), everywhere.region.end());

  Heatmap h = Heatmap::zeros(g, frame, Vec2(3.2, 1.6));
  bool exact = true;
  for (double c : {0.05, 0.377, 0.721, 1.0}) {
    for (const CellIndex& x : frame.lattice()) h.at(x) = c;
    for (int n : {1, 3, 5, 17, 100, 10000}) exact = exact && fea_t(everywhere, h, n, kSeed) == c;
  }
  Rng rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s1 = 0.0, s2 = 0.0;
  for (const CellIndex& x : frame.lattice()) {
    h.at(x) = u(rng);
    s1 += h.at(x);
    s2 += h.at(x) * h.at(x);
  }
  const double est = fea_t(everywhere, h, 10000, kSeed);
  const double err = std::abs(est - s2 / s1);
  report(4, exact && err < kEstimatorTol,
         std::string(exact ? "uniform exact" : "uniform NOT exact") + fmt(", |%.4f - %.4f| = %.4f", est, s2 / s1, err));
}

void oracle_properties() {
  const TrialParams params;
  long occupied = 0, beyond = 0, monotone = 0, cells = 0;
  for (int i = 0; i < kPairedEnvironments; ++i) {
    const std::uint64_t s = derive_seed(kSeed, {0xACC5, static_cast<std::uint64_t>(i)});
    const Environment more = random_environment(s);
    const Vec2 y = random_task(more, s, 1).moves[0].target;
    std::size_t nearest = 0;
    for (std::size_t k = 1; k < more.chairs().size(); ++k) {
      if ((more.chairs()[k].center - y).norm() < (more.chairs()[nearest].center - y).norm()) nearest = k;
    }
    const Environment fewer = more.without_chair(nearest);
    const Heatmap hm = collect_heatmap(more, y, 5, s, params).heatmap;
    const Heatmap hf = collect_heatmap(fewer, y, 5, s, params).heatmap;
    for (const auto* pair : {&hm, &hf}) {
      const Environment& env = pair == &hm ? more : fewer;
      for (const CellIndex& fc : pair->frame.lattice()) {
        const CellIndex x = frame_to_map(env.map(), pair->frame, y, fc);
        ++cells;
        if (env.map().blocked(x) && pair->at(fc) != 0.0) ++occupied;
        if ((env.map().to_world(x) - y).norm() > params.arm.reach && pair->at(fc) != 0.0) ++beyond;
      }
    }
    monotone += (hm.values > hf.values).count();
  }
  report(5, occupied == 0 && beyond == 0 && monotone == 0,
         fmt("%.0f paired environments, %.0f cells; violations: occupied %.0f, beyond reach %.0f, ",
             kPairedEnvironments, static_cast<double>(cells), static_cast<double>(occupied), static_cast<double>(beyond)) +
             fmt("chair monotonicity %.0f", static_cast<double>(monotone)));
}

Evaluator evaluator_quality(const Dataset& d) {
  const Evaluator a = train_evaluator(d, {}, kSeed);
  const Evaluator b = train_evaluator(d, {}, kSeed);
  const bool same = a.serialize() == b.serialize();
  const double mae = a.report().holdout_mae;
  report(6, same && mae <= kMaeBar,
         fmt("holdout MAE %.4f over %.0f tasks, ", mae, static_cast<double>(a.report().holdout_tasks.size())) +
             (same ? "deterministic" : "NOT deterministic"));
  return a;
}

const MetricsRow* find(const std::vector<MetricsRow>& m, const std::string& planner, const std::string& group,
                       double velocity) {
  for (const MetricsRow& r : m) {
    if (r.planner == planner && r.group == group && r.velocity == velocity) return &r;
  }
  return nullptr;
}

std::string benchmark_dominance(const Evaluator& ev) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchmarkConfig c;
  c.seed = kSeed;
  c.overlays = false;
  const BenchmarkResult r = run_benchmark(c, &ev);
  const double t = seconds_since(t0);
  bool ok = t < kBenchBudget;
  std::string detail;
  for (const char* g : {"easy", "normal", "hard"}) {
    const MetricsRow* grop = find(r.metrics, "grop", g, 0.4);
    const MetricsRow* petlon = find(r.metrics, "petlon", g, 0.4);
    const MetricsRow* dvh = find(r.metrics, "dvh", g, 0.4);
    if (!grop || !petlon || !dvh) {
      ok = false;
      continue;
    }
    ok = ok && grop->completion_rate >= petlon->completion_rate && grop->completion_rate >= dvh->completion_rate;
    detail += std::string(g) + fmt(" %.3f/%.3f/%.3f; ", grop->completion_rate, petlon->completion_rate, dvh->completion_rate);
  }
  const MetricsRow* grop = find(r.metrics, "grop", "all", 0.4);
  const MetricsRow* dvh = find(r.metrics, "dvh", "all", 0.4);
  ok = ok && grop && dvh && grop->mean_time <= dvh->mean_time;
  if (grop && dvh) detail += fmt("time grop %.2f s vs dvh %.2f s; %.1f s", grop->mean_time, dvh->mean_time, t);
  report(7, ok, "completion grop/petlon/dvh " + detail);
  return raw_csv(r.raw);
}

void reduction_identities(const Evaluator& ev) {
  const HeatmapFn heatmaps = evaluator_heatmaps(ev);
  int agree_zero = 0, agree_large = 0;
  for (int i = 0; i < kReductionTasks; ++i) {
    const std::uint64_t s = derive_seed(kSeed, {0x8ED, static_cast<std::uint64_t>(i)});
    const Environment env = random_environment(s);
    const TaskSpec task = random_task(env, s);
    for (double bonus : {0.0, 1e6}) {
      PlannerConfig config;
      config.seed = s;
      config.bonus = bonus;
      const PlanningResult g = grop_plan(env, task, heatmaps, config);
      Grounder grounder(env, task, heatmaps, config);
      const PlanningResult cands = ground_candidates(grounder);
      const BaselineKind kind = bonus == 0.0 ? BaselineKind::Petlon : BaselineKind::Dvh;
      const std::size_t b = baseline_select(kind, cands.candidates, bonus, s);
      const bool same = g.best().task_plan == cands.candidates[b].task_plan;
      (bonus == 0.0 ? agree_zero : agree_large) += same;
    }
  }
  report(8, agree_zero == kReductionTasks && agree_large == kReductionTasks,
         fmt("R=0 vs petlon-like %.0f/%.0f, R=1e6 vs dvh-like %.0f/%.0f", agree_zero, kReductionTasks, agree_large,
             kReductionTasks));
}

void velocity_adaptivity(const Evaluator& ev) {
  const SwitchingSweep s = switching_sweep(builtin_scenario("t1"));
  bool ok = s.observed.has_value() && std::abs(*s.observed - s.predicted) <= s.step + 1e-9;
  for (const SwitchPoint& p : s.points) {
    ok = ok && p.petlon == s.points.front().petlon && p.dvh == s.points.front().dvh;
  }
  BenchmarkConfig c;
  c.seed = kSeed;
  c.overlays = false;
  c.velocities = {0.2, 0.4, 0.8};
  c.planners = {"grop", "petlon", "dvh"};
  const BenchmarkResult r = run_benchmark(c, &ev);
  double f[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const MetricsRow* m = find(r.metrics, "grop", "all", c.velocities[static_cast<std::size_t>(i)]);
    ok = ok && m;
    if (m) f[i] = m->mean_feasibility;
  }
  ok = ok && f[0] <= f[1] && f[1] <= f[2];
  report(9, ok,
         fmt("switch at %.2f m/s, predicted %.4f m/s, step %.2f; ", s.observed.value_or(-1), s.predicted, s.step) +
             fmt("grop mean F %.4f/%.4f/%.4f at 0.2/0.4/0.8 m/s", f[0], f[1], f[2]));
}

void determinism(const Evaluator& ev, const std::string& first) {
  BenchmarkConfig c;
  c.seed = kSeed;
  c.overlays = false;
  const std::string second = raw_csv(run_benchmark(c, &ev).raw);
  report(10, first == second, fmt("raw CSV %.0f bytes, ", static_cast<double>(first.size())) +
                                  (first == second ? "byte-identical" : "DIFFERENT"));
}

}  // namespace

int main() {
  utility_exactness();
  cost_model();
  const Dataset d = dataset_bookkeeping();
  estimator();
  oracle_properties();
  const Evaluator ev = evaluator_quality(d);
  const std::string raw = benchmark_dominance(ev);
  reduction_identities(ev);
  velocity_adaptivity(ev);
  determinism(ev, raw);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
