#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "grop/harness.hpp"

namespace fs = std::filesystem;
using namespace grop;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void dump(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write " + p.string());
}

std::string padded(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", i);
  return buf;
}

struct Globals {
  std::uint64_t seed = 1;
  std::string config;
  std::string out = "out";
};

BenchmarkConfig load_config(const Globals& g) {
  BenchmarkConfig c = g.config.empty() ? BenchmarkConfig{} : parse_benchmark_config(slurp(g.config));
  return c;
}

std::optional<Evaluator> load_evaluator(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return Evaluator::deserialize(slurp(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded task-and-motion planning with feasibility heatmaps"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--config", g.config, "Benchmark configuration (JSON)");
  app.add_option("--out", g.out, "Output directory");

  // gen-envs
  auto* gen = app.add_subcommand("gen-envs", "Write random environments as scene files and PGM maps");
  int gen_count = 10;
  ChairRange gen_chairs;
  gen->add_option("--count", gen_count, "Number of environments")->check(CLI::PositiveNumber);
  gen->add_option("--chairs-min", gen_chairs.min);
  gen->add_option("--chairs-max", gen_chairs.max);

  // collect
  auto* collect = app.add_subcommand("collect", "Run feasibility trials and write the dataset");
  DatasetOptions dopt;
  collect->add_option("--envs", dopt.environments)->check(CLI::PositiveNumber);
  collect->add_option("--tasks", dopt.tasks_per_environment, "Tasks per environment")->check(CLI::PositiveNumber);
  collect->add_option("--trials", dopt.trials_per_cell, "Trials per stand cell")->check(CLI::PositiveNumber);
  collect->add_option("--threads", dopt.threads)->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "Fit the feasibility evaluator on a dataset");
  std::string train_data;
  EvaluatorParams eparams;
  train->add_option("--data", train_data, "Dataset directory")->required();
  train->add_option("--epochs", eparams.epochs);
  train->add_option("--lr", eparams.learning_rate);
  train->add_option("--patch-radius", eparams.patch_radius);

  // plan
  auto* plan = app.add_subcommand("plan", "Plan one task");
  std::string plan_task, plan_env, plan_eval, plan_planner = "grop", plan_agg = "product";
  PlannerConfig pconf;
  int plan_trials = 5;
  plan->add_option("--task", plan_task)->required();
  plan->add_option("--env", plan_env)->required();
  plan->add_option("--evaluator", plan_eval, "Evaluator file; Monte-Carlo trials are used when absent");
  plan->add_option("--oracle-trials", plan_trials)->check(CLI::PositiveNumber);
  plan->add_option("--bonus", pconf.bonus);
  plan->add_option("--velocity", pconf.velocity);
  plan->add_option("--samples", pconf.samples);
  plan->add_option("--aggregation", plan_agg)->check(CLI::IsMember({"product", "sum", "mean"}));
  plan->add_option("--planner", plan_planner)->check(CLI::IsMember({"grop", "satisficing", "petlon", "dvh", "fcn"}));

  // bench / sweep
  auto* bench = app.add_subcommand("bench", "Difficulty-grouped benchmark of all planners");
  auto* sweep = app.add_subcommand("sweep", "Benchmark at 0.2, 0.4 and 0.8 m/s plus the switching scenario");
  std::string bench_eval;
  int bench_envs = 0, bench_tasks = 0;
  for (auto* sc : {bench, sweep}) {
    sc->add_option("--evaluator", bench_eval, "Evaluator file; Monte-Carlo trials are used when absent");
    sc->add_option("--envs", bench_envs, "Override the number of environments");
    sc->add_option("--tasks", bench_tasks, "Override tasks per environment");
  }

  // replay
  auto* replay = app.add_subcommand("replay", "Replay a scripted two-sided scenario");
  std::string replay_name, replay_file;
  std::optional<double> replay_bonus, replay_velocity;
  replay->add_option("name", replay_name, "t1 or t2");
  replay->add_option("--file", replay_file, "Scenario file");
  replay->add_option("--bonus", replay_bonus);
  replay->add_option("--velocity", replay_velocity);

  // report
  auto* report = app.add_subcommand("report", "Recompute metrics from a raw benchmark CSV");
  std::string report_raw;
  report->add_option("--raw", report_raw)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const fs::path out = g.out;
    if (*gen) {
      fs::create_directories(out);
      for (int i = 0; i < gen_count; ++i) {
        const Environment env = random_environment(derive_seed(g.seed, {1, static_cast<std::uint64_t>(i)}), gen_chairs);
        dump(out / ("env_" + padded(i) + ".scene"), write_scene(env.spec()));
        dump(out / ("env_" + padded(i) + ".pgm"), to_pgm(env.map()));
      }
      std::cout << "wrote " << gen_count << " environments to " << out << "\n";
    } else if (*collect) {
      const Dataset d = build_dataset(dopt, g.seed);
      save_dataset(d, out);
      std::cout << "labeled images: " << d.labels.size() << "\ntrial records: " << d.records.size() << "\n";
    } else if (*train) {
      const Dataset d = load_dataset(train_data);
      const Evaluator ev = train_evaluator(d, eparams, g.seed);
      dump(out / "evaluator.txt", ev.serialize());
      std::cout << "train MSE " << ev.report().train_mse << "\nholdout MAE " << ev.report().holdout_mae << "\n";
    } else if (*plan) {
      SceneSpec spec;
      TaskSpec task;
      try {
        spec = parse_scene(slurp(plan_env));
        task = parse_task(slurp(plan_task));
      } catch (const SceneError& e) {
        throw DataError(e.what());
      }
      const Environment env = build_environment(spec);
      pconf.seed = g.seed;
      pconf.aggregation = parse_aggregation(plan_agg);
      const auto ev = load_evaluator(plan_eval);
      const HeatmapFn heatmaps = ev ? evaluator_heatmaps(*ev) : oracle_heatmaps(plan_trials, g.seed);
      PlanningResult r;
      if (plan_planner == "grop") {
        r = grop_plan(env, task, heatmaps, pconf);
      } else {
        r = baseline_plan(parse_baseline(plan_planner), env, task, heatmaps, pconf);
      }
      const TaskMotionPlan& best = r.best();
      std::cout << format_plan(r.domain, best.task_plan);
      std::printf("F %.4f  C %.3f s  U %.4f  (%zu candidates)\n", best.feasibility, best.cost, best.utility,
                  r.candidates.size());
      dump(out / "plan.json", plan_report_json(r));
    } else if (*bench || *sweep) {
      BenchmarkConfig c = load_config(g);
      c.seed = g.seed;
      if (bench_envs > 0) c.environments = bench_envs;
      if (bench_tasks > 0) c.tasks_per_environment = bench_tasks;
      if (*sweep && g.config.empty()) c.velocities = {0.2, 0.4, 0.8};
      const auto ev = load_evaluator(bench_eval);
      const Evaluator* evp = ev ? &*ev : nullptr;
      if (*bench) {
        const BenchmarkResult r = run_benchmark(c, evp);
        emit_reports(r, out);
        std::cout << summary_text(r.metrics);
      } else {
        const VelocitySweep s = velocity_sweep(c, evp);
        emit_reports(s.benchmark, out);
        std::string csv = "velocity,grop,petlon,dvh,grop_feasibility\n";
        for (const SwitchPoint& p : s.switching.points) {
          char line[160];
          std::snprintf(line, sizeof(line), "%.3f,%s,%s,%s,%.6f\n", p.velocity, p.grop.c_str(), p.petlon.c_str(),
                        p.dvh.c_str(), p.grop_feasibility);
          csv += line;
        }
        dump(out / "switching.csv", csv);
        std::cout << summary_text(s.benchmark.metrics);
        std::printf("switching velocity: predicted %.4f m/s, observed %s\n", s.switching.predicted,
                    s.switching.observed ? std::to_string(*s.switching.observed).c_str() : "none");
      }
    } else if (*replay) {
      Scenario s;
      if (!replay_file.empty()) {
        s = parse_scenario(slurp(replay_file));
      } else if (!replay_name.empty()) {
        s = builtin_scenario(replay_name);
      } else {
        std::cerr << "replay needs a scenario name or --file\n";
        return 1;
      }
      std::cout << replay_text(replay_scenario(s, replay_bonus, replay_velocity));
    } else if (*report) {
      const std::vector<RawRow> raw = parse_raw_csv(slurp(report_raw));
      std::vector<std::string> planners;
      for (const RawRow& r : raw) {
        if (std::find(planners.begin(), planners.end(), r.planner) == planners.end()) planners.push_back(r.planner);
      }
      BenchmarkResult r;
      r.raw = raw;
      r.metrics = aggregate_metrics(raw, planners);
      emit_reports(r, out);
      std::cout << summary_text(r.metrics);
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const SceneError& e) {
    std::cerr << "scene error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
