#include "grop/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "grop/rng.hpp"

namespace grop {

void BenchmarkConfig::validate() const {
  if (environments < 1) throw std::invalid_argument("need at least one environment");
  if (tasks_per_environment < 1 || targets_per_task < 1) throw std::invalid_argument("task counts must be positive");
  if (planners.empty()) throw std::invalid_argument("need at least one planner");
  for (const std::string& p : planners) {
    if (p != "grop") parse_baseline(p);
  }
  if (velocities.empty()) throw std::invalid_argument("need at least one velocity");
  for (double v : velocities) {
    if (!(v > 0.0)) throw std::invalid_argument("velocities must be positive");
  }
  if (bonus < 0.0 || samples < 1 || oracle_trials < 1) throw std::invalid_argument("invalid planner parameters");
}

BenchmarkConfig parse_benchmark_config(const std::string& json_text) {
  BenchmarkConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad config: ") + e.what());
  }
  if (!j.is_object()) throw DataError("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "environments") c.environments = v.get<int>();
      else if (key == "tasks_per_environment") c.tasks_per_environment = v.get<int>();
      else if (key == "targets_per_task") c.targets_per_task = v.get<int>();
      else if (key == "planners") c.planners = v.get<std::vector<std::string>>();
      else if (key == "velocities") c.velocities = v.get<std::vector<double>>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "chairs_min") c.chairs.min = v.get<int>();
      else if (key == "chairs_max") c.chairs.max = v.get<int>();
      else if (key == "sigma_pos") c.noise.sigma_pos = v.get<double>();
      else if (key == "sigma_theta") c.noise.sigma_theta = v.get<double>();
      else if (key == "max_resamples") c.noise.max_resamples = v.get<int>();
      else if (key == "reach") c.arm.reach = v.get<double>();
      else if (key == "manipulation_cost") c.arm.manipulation_cost = v.get<double>();
      else if (key == "tolerance") c.tolerance = v.get<double>();
      else if (key == "bonus") c.bonus = v.get<double>();
      else if (key == "samples") c.samples = v.get<int>();
      else if (key == "aggregation") c.aggregation = parse_aggregation(v.get<std::string>());
      else if (key == "oracle_trials") c.oracle_trials = v.get<int>();
      else if (key == "difficulty_threshold") c.difficulty_threshold = v.get<double>();
      else if (key == "overlays") c.overlays = v.get<bool>();
      else throw DataError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad config value: ") + e.what());
  }
  return c;
}

std::vector<std::string> difficulty_terciles(const std::vector<double>& difficulty) {
  const std::size_t n = difficulty.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return difficulty[a] > difficulty[b]; });
  static const char* names[] = {"easy", "normal", "hard"};
  std::vector<std::string> out(n);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t size = n / 3 + (g < n % 3 ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) out[order[pos++]] = names[g];
  }
  return out;
}

namespace {

HeatmapFn memoized(HeatmapFn f) {
  auto cache = std::make_shared<std::map<std::pair<double, double>, Heatmap>>();
  return [f = std::move(f), cache](const Environment& env, const Vec2& y) {
    const auto key = std::make_pair(y.x(), y.y());
    if (auto it = cache->find(key); it != cache->end()) return it->second;
    return cache->emplace(key, f(env, y)).first->second;
  };
}

std::string unload_sides(const PlanningResult& r) {
  const TaskMotionPlan& p = r.best();
  std::vector<std::string> side(r.domain.objects.size());
  for (const SymbolicAction& a : p.task_plan.actions) {
    if (a.kind == ActionKind::Unload) side.at(static_cast<std::size_t>(a.object)) = r.domain.locations.at(static_cast<std::size_t>(a.location)).name;
  }
  std::string out;
  for (std::size_t i = 0; i < side.size(); ++i) out += (i ? "|" : "") + side[i];
  return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& config, const Evaluator* evaluator) {
  config.validate();
  BenchmarkResult result;
  TrialParams trial;
  trial.noise = config.noise;
  trial.arm = config.arm;
  trial.tolerance = config.tolerance;
  if (evaluator) trial.frame = evaluator->frame();

  struct TaskRun {
    std::size_t first_row = 0;
    std::size_t rows = 0;
  };
  std::vector<TaskRun> runs;
  std::vector<double> difficulty;

  for (int e = 0; e < config.environments; ++e) {
    const auto ue = static_cast<std::uint64_t>(e);
    const Environment env = random_environment(derive_seed(config.seed, {1, ue}), config.chairs);
    for (int t = 0; t < config.tasks_per_environment; ++t) {
      const auto ut = static_cast<std::uint64_t>(t);
      const TaskSpec task = random_task(env, derive_seed(config.seed, {2, ue, ut}), config.targets_per_task);
      const HeatmapFn oracle = memoized(oracle_heatmaps(config.oracle_trials, derive_seed(config.seed, {3, ue, ut}), trial));
      const HeatmapFn planning = evaluator ? memoized(evaluator_heatmaps(*evaluator)) : oracle;
      difficulty.push_back(task_difficulty(env, task, oracle, config.difficulty_threshold));

      if (config.overlays) {
        for (std::size_t o = 0; o < task.moves.size(); ++o) {
          const Vec2 y = task.moves[o].target;
          char name[64];
          std::snprintf(name, sizeof(name), "env%03d_task%02d_%s", e, t, task.moves[o].object_id.c_str());
          result.overlays.push_back({name, render_topdown(env, y, trial.frame.width, trial.frame.height), planning(env, y)});
        }
      }

      TaskRun run{result.raw.size(), 0};
      for (std::size_t vi = 0; vi < config.velocities.size(); ++vi) {
        PlannerConfig pc;
        pc.bonus = config.bonus;
        pc.velocity = config.velocities[vi];
        pc.aggregation = config.aggregation;
        pc.samples = config.samples;
        pc.seed = derive_seed(config.seed, {4, ue, ut});
        pc.arm = config.arm;
        ExecutionOptions xo;
        xo.noise = config.noise;
        xo.tolerance = config.tolerance;
        xo.velocity = pc.velocity;
        xo.arm = config.arm;
        xo.allow_gaps = true;
        const std::uint64_t exec_seed = derive_seed(config.seed, {5, ue, ut, vi});

        Grounder grounder(env, task, planning, pc);
        std::optional<PlanningResult> candidates;
        std::string unsolvable;
        try {
          candidates = ground_candidates(grounder);
        } catch (const UnsolvableError& err) {
          unsolvable = err.what();
        }
        for (const std::string& name : config.planners) {
          RawRow row;
          row.environment = e;
          row.task = t;
          row.planner = name;
          row.velocity = pc.velocity;
          row.targets = static_cast<int>(task.moves.size());
          if (candidates) {
            PlanningResult r;
            if (name == "grop") {
              r = *candidates;
              r.selected = select_plan(r.candidates, pc.bonus);
            } else {
              r = baseline_plan(parse_baseline(name), grounder, *candidates, derive_seed(config.seed, {6, ue, ut}));
            }
            const TaskMotionPlan& p = r.best();
            const ExecutionReport rep = execute_plan(p, env, task, xo, exec_seed);
            const auto& all = candidates->candidates;
            row.plan = std::find_if(all.begin(), all.end(),
                                    [&](const TaskMotionPlan& c) { return c.task_plan == p.task_plan; }) -
                       all.begin();
            row.sides = unload_sides(r);
            row.feasibility = p.feasibility;
            row.cost = p.cost;
            row.utility = p.utility;
            row.successes = rep.successes();
            row.time = rep.realized_time;
          }
          result.raw.push_back(row);
          ++run.rows;
        }
      }
      runs.push_back(run);
    }
  }

  const std::vector<std::string> groups = difficulty_terciles(difficulty);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t k = 0; k < runs[i].rows; ++k) {
      RawRow& row = result.raw[runs[i].first_row + k];
      row.difficulty = difficulty[i];
      row.group = groups[i];
    }
  }
  result.metrics = aggregate_metrics(result.raw, config.planners);
  return result;
}

std::vector<MetricsRow> aggregate_metrics(const std::vector<RawRow>& raw, const std::vector<std::string>& planners) {
  std::vector<double> velocities;
  for (const RawRow& r : raw) {
    if (std::find(velocities.begin(), velocities.end(), r.velocity) == velocities.end()) velocities.push_back(r.velocity);
  }
  std::vector<MetricsRow> out;
  for (double v : velocities) {
    for (const std::string& planner : planners) {
      for (const char* group : {"easy", "normal", "hard", "all"}) {
        MetricsRow m;
        m.planner = planner;
        m.group = group;
        m.velocity = v;
        double time = 0.0, util = 0.0, feas = 0.0;
        for (const RawRow& r : raw) {
          if (r.velocity != v || r.planner != planner) continue;
          if (std::string(group) != "all" && r.group != group) continue;
          ++m.tasks;
          m.targets += r.targets;
          m.successes += r.successes;
          time += r.time;
          util += r.utility;
          feas += r.feasibility;
        }
        if (m.tasks == 0) continue;
        m.completion_rate = m.targets ? static_cast<double>(m.successes) / m.targets : 0.0;
        m.mean_time = time / m.tasks;
        m.mean_utility = util / m.tasks;
        m.mean_feasibility = feas / m.tasks;
        out.push_back(m);
      }
    }
  }
  return out;
}

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

constexpr const char* kRawHeader =
    "environment,task,planner,velocity,difficulty,group,plan,sides,feasibility,cost,utility,targets,successes,time";

}  // namespace

std::string raw_csv(const std::vector<RawRow>& rows) {
  std::string out = std::string(kRawHeader) + "\n";
  for (const RawRow& r : rows) {
    out += std::to_string(r.environment) + "," + std::to_string(r.task) + "," + r.planner + "," +
           fixed(r.velocity, 3) + "," + fixed(r.difficulty, 1) + "," + r.group + "," + std::to_string(r.plan) + "," +
           r.sides + "," + fixed(r.feasibility) + "," + fixed(r.cost) + "," + fixed(r.utility) + "," +
           std::to_string(r.targets) + "," + std::to_string(r.successes) + "," + fixed(r.time) + "\n";
  }
  return out;
}

std::vector<RawRow> parse_raw_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kRawHeader) throw DataError("raw CSV header mismatch");
  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw DataError("raw CSV row has " + std::to_string(f.size()) + " fields: " + line);
    try {
      RawRow r;
      r.environment = std::stoi(f[0]);
      r.task = std::stoi(f[1]);
      r.planner = f[2];
      r.velocity = std::stod(f[3]);
      r.difficulty = std::stod(f[4]);
      r.group = f[5];
      r.plan = std::stol(f[6]);
      r.sides = f[7];
      r.feasibility = std::stod(f[8]);
      r.cost = std::stod(f[9]);
      r.utility = std::stod(f[10]);
      r.targets = std::stoi(f[11]);
      r.successes = std::stoi(f[12]);
      r.time = std::stod(f[13]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw DataError("bad raw CSV row: " + line);
    }
  }
  return rows;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "planner,group,velocity,tasks,targets,successes,completion_rate,mean_time,mean_utility,mean_feasibility\n";
  for (const MetricsRow& m : rows) {
    out += m.planner + "," + m.group + "," + fixed(m.velocity, 3) + "," + std::to_string(m.tasks) + "," +
           std::to_string(m.targets) + "," + std::to_string(m.successes) + "," + fixed(m.completion_rate) + "," +
           fixed(m.mean_time) + "," + fixed(m.mean_utility) + "," + fixed(m.mean_feasibility) + "\n";
  }
  return out;
}

std::string summary_text(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-7s %8s %6s %10s %10s %10s %8s\n", "planner", "group", "velocity",
                "tasks", "completion", "time[s]", "utility", "F");
  out << line;
  for (const MetricsRow& m : rows) {
    std::snprintf(line, sizeof(line), "%-12s %-7s %8.2f %6d %10.3f %10.2f %10.2f %8.3f\n", m.planner.c_str(),
                  m.group.c_str(), m.velocity, m.tasks, m.completion_rate, m.mean_time, m.mean_utility,
                  m.mean_feasibility);
    out << line;
  }
  return out.str();
}

void emit_reports(const BenchmarkResult& result, const std::filesystem::path& dir) {
  if (result.raw.empty()) throw std::invalid_argument("no rows to report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "raw.csv", raw_csv(result.raw));
  write_file(dir / "metrics.csv", metrics_csv(result.metrics));
  write_file(dir / "summary.txt", summary_text(result.metrics));
  if (!result.overlays.empty()) {
    std::filesystem::create_directories(dir / "overlays");
    for (const Overlay& o : result.overlays) {
      write_file(dir / "overlays" / (o.name + ".pgm"), overlay_pgm(o.image, o.heatmap));
    }
  }
}

// ---------------------------------------------------------------------------
// Scripted scenarios

Scenario builtin_scenario(const std::string& name) {
  if (name == "t1") return {"t1", 40.0, 0.6, {{"south", 0.377, 4.5}, {"east", 0.721, 11.6}}};
  if (name == "t2") return {"t2", 40.0, 0.6, {{"south", 0.520, 4.5}, {"east", 0.721, 11.6}}};
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

Scenario parse_scenario(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Scenario s;
  bool header = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "format:") {
      int v = 0;
      ls >> v;
      if (v != 1) throw DataError("unsupported scenario format");
      header = true;
      continue;
    }
    bool ok = true;
    if (key == "name") {
      ok = static_cast<bool>(ls >> s.name);
    } else if (key == "bonus") {
      ok = static_cast<bool>(ls >> s.bonus);
    } else if (key == "velocity") {
      ok = static_cast<bool>(ls >> s.velocity);
    } else if (key == "side") {
      ScenarioSide side;
      ok = static_cast<bool>(ls >> side.name >> side.feasibility >> side.distance);
      s.sides.push_back(side);
    } else {
      throw DataError("unknown scenario key '" + key + "'");
    }
    if (!ok) throw DataError("malformed scenario line: " + line);
  }
  if (!header) throw DataError("scenario is missing the 'format: 1' header");
  if (s.sides.empty()) throw DataError("scenario has no sides");
  return s;
}

std::string write_scenario(const Scenario& s) {
  std::ostringstream out;
  out << "format: 1\nname " << s.name << "\nbonus " << format_number(s.bonus) << "\nvelocity "
      << format_number(s.velocity) << "\n";
  for (const ScenarioSide& side : s.sides) {
    out << "side " << side.name << " " << format_number(side.feasibility) << " " << format_number(side.distance) << "\n";
  }
  return out.str();
}

PlanningResult ground_scripted(const Scenario& s, const PlannerConfig& config) {
  for (const ScenarioSide& side : s.sides) {
    if (side.feasibility < 0.0 || side.feasibility > 1.0 || side.distance < 0.0) {
      throw std::invalid_argument("side '" + side.name + "' has invalid feasibility or distance");
    }
  }
  PlanningResult r;
  TaskDomain& d = r.domain;
  d.locations.push_back({"loading", true, false});
  for (const ScenarioSide& side : s.sides) d.locations.push_back({side.name, true, true});
  d.objects.push_back({"obj0", 0});
  d.robot_start = 0;

  const FrameSpec frame;
  GridGeometry g;
  g.width = frame.width;
  g.height = frame.height;
  SymbolicLocation everywhere;
  everywhere.grid = g;
  for (int row = 0; row < g.height; ++row) {
    for (int col = 0; col < g.width; ++col) everywhere.region.push_back({col, row});
  }
  std::sort(everywhere.region.begin(), everywhere.region.end());

  const Pose start(0.0, 0.0, 0.0);
  const PlanSet set = enumerate_satisficing_plans(d);
  for (const TaskPlan& plan : set.plans) {
    TaskMotionPlan p;
    p.task_plan = plan;
    p.positions = {start};
    Pose here = start;
    std::vector<double> evaluated;
    std::optional<std::size_t> nav;
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
      const SymbolicAction& a = plan.actions[i];
      if (a.kind == ActionKind::Navigate) {
        const ScenarioSide& side = s.sides.at(static_cast<std::size_t>(a.location - 1));
        const Pose stand(side.distance, 0.0, 0.0);
        p.motion_plan.push_back({TrajectoryKind::Navigation, {here, stand}, std::nullopt, false});
        here = stand;
        p.positions.push_back(here);
        nav = i;
        continue;
      }
      Trajectory m{TrajectoryKind::Manipulation, {here}, here.position(), false};
      PairGrounding pair;
      pair.navigate = nav;
      pair.manipulation = i;
      pair.location = a.location;
      pair.object = a.object;
      pair.stand = here;
      pair.cost = trajectory_cost(m, config.velocity, config.arm.manipulation_cost) +
                  (nav ? trajectory_cost(p.motion_plan[*nav], config.velocity) : 0.0);
      if (a.kind == ActionKind::Unload) {
        Heatmap h = Heatmap::zeros(g, frame, Vec2(3.2, 1.6));
        const double f = s.sides.at(static_cast<std::size_t>(a.location - 1)).feasibility;
        for (const CellIndex& c : frame.lattice()) h.at(c) = f;
        pair.feasibility = fea_t(everywhere, h, config.samples,
                                 derive_seed(config.seed, {0xFEA, 0, static_cast<std::uint64_t>(a.location)}));
        pair.evaluated = true;
        evaluated.push_back(pair.feasibility);
      }
      p.pairs.push_back(pair);
      p.motion_plan.push_back(std::move(m));
      nav.reset();
    }
    for (const Trajectory& t : p.motion_plan) p.cost += trajectory_cost(t, config.velocity, config.arm.manipulation_cost);
    p.feasibility = aggregate(evaluated, config.aggregation);
    p.utility = utility(p.feasibility, p.cost, config.bonus);
    r.candidates.push_back(std::move(p));
  }
  r.selected = select_plan(r.candidates, config.bonus);
  return r;
}

namespace {

std::string unload_side(const PlanningResult& r, std::size_t index) {
  for (const SymbolicAction& a : r.candidates.at(index).task_plan.actions) {
    if (a.kind == ActionKind::Unload) return r.domain.locations.at(static_cast<std::size_t>(a.location)).name;
  }
  return "";
}

}  // namespace

ReplayReport replay_scenario(const Scenario& s, std::optional<double> bonus, std::optional<double> velocity) {
  PlannerConfig config;
  config.bonus = bonus.value_or(s.bonus);
  config.velocity = velocity.value_or(s.velocity);
  ReplayReport rep;
  rep.scenario = s.name;
  rep.planning = ground_scripted(s, config);
  for (std::size_t i = 0; i < rep.planning.candidates.size(); ++i) {
    const TaskMotionPlan& p = rep.planning.candidates[i];
    ReplayRow row;
    row.side = unload_side(rep.planning, i);
    for (const ScenarioSide& side : s.sides) {
      if (side.name == row.side) row.distance = side.distance;
    }
    row.feasibility = p.feasibility;
    row.cost = p.cost;
    row.utility = p.utility;
    rep.rows.push_back(row);
  }
  rep.selected = unload_side(rep.planning, rep.planning.selected);
  return rep;
}

std::string replay_text(const ReplayReport& r) {
  std::ostringstream out;
  char line[160];
  out << "scenario " << r.scenario << "\n";
  std::snprintf(line, sizeof(line), "%-8s %8s %10s %10s %10s\n", "side", "F", "distance", "cost[s]", "utility");
  out << line;
  for (const ReplayRow& row : r.rows) {
    std::snprintf(line, sizeof(line), "%-8s %8.3f %10.2f %10.2f %10.2f%s\n", row.side.c_str(), row.feasibility,
                  row.distance, row.cost, row.utility, row.side == r.selected ? "  <- selected" : "");
    out << line;
  }
  out << "selected: " << r.selected << "\n";
  return out.str();
}

SwitchingSweep switching_sweep(const Scenario& s, double lo, double hi, double step) {
  if (s.sides.size() != 2) throw std::invalid_argument("switching sweep needs exactly two sides");
  if (!(step > 0.0) || !(lo > 0.0) || hi < lo) throw std::invalid_argument("bad velocity grid");
  const ScenarioSide& near = s.sides[0];
  const ScenarioSide& far = s.sides[1];
  SwitchingSweep out;
  out.step = step;
  out.predicted = (far.distance - near.distance) / (s.bonus * (far.feasibility - near.feasibility));
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) {
    PlannerConfig config;
    config.bonus = s.bonus;
    config.velocity = lo + i * step;
    const PlanningResult r = ground_scripted(s, config);
    SwitchPoint pt;
    pt.velocity = config.velocity;
    pt.grop = unload_side(r, r.selected);
    pt.grop_feasibility = r.best().feasibility;
    pt.petlon = unload_side(r, baseline_select(BaselineKind::Petlon, r.candidates, config.bonus, 0));
    pt.dvh = unload_side(r, baseline_select(BaselineKind::Dvh, r.candidates, config.bonus, 0));
    if (!out.observed && pt.grop == far.name) out.observed = pt.velocity;
    out.points.push_back(pt);
  }
  return out;
}

VelocitySweep velocity_sweep(const BenchmarkConfig& config, const Evaluator* evaluator) {
  VelocitySweep out;
  out.benchmark = run_benchmark(config, evaluator);
  out.switching = switching_sweep(builtin_scenario("t1"));
  return out;
}

}  // namespace grop
