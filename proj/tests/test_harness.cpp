#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "grop/harness.hpp"

using namespace grop;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

BenchmarkConfig tiny_config() {
  BenchmarkConfig c;
  c.environments = 2;
  c.tasks_per_environment = 2;
  c.targets_per_task = 2;
  c.oracle_trials = 2;
  c.seed = 9;
  return c;
}

}  // namespace

TEST_CASE("difficulty terciles") {
  const std::vector<double> d{5, 1, 9, 3, 7, 2, 8};
  const auto g = difficulty_terciles(d);
  CHECK(g == std::vector<std::string>{"normal", "hard", "easy", "normal", "easy", "hard", "easy"});
  const auto ties = difficulty_terciles({4, 4, 4, 4, 4, 4});
  CHECK(ties == std::vector<std::string>{"easy", "easy", "normal", "normal", "hard", "hard"});
  CHECK(difficulty_terciles({}).empty());
  CHECK(difficulty_terciles({1.0}) == std::vector<std::string>{"easy"});
}

TEST_CASE("benchmark configuration parsing") {
  const BenchmarkConfig c = parse_benchmark_config(
      R"({"environments": 4, "planners": ["grop", "dvh"], "velocities": [0.2, 0.8], "seed": 12,
          "chairs_min": 2, "chairs_max": 3, "sigma_pos": 0.05, "aggregation": "mean", "overlays": false})");
  CHECK(c.environments == 4);
  CHECK(c.planners == std::vector<std::string>{"grop", "dvh"});
  CHECK(c.velocities == std::vector<double>{0.2, 0.8});
  CHECK(c.seed == 12);
  CHECK(c.chairs.max == 3);
  CHECK(c.noise.sigma_pos == 0.05);
  CHECK(c.aggregation == Aggregation::Mean);
  CHECK_FALSE(c.overlays);
  CHECK_NOTHROW(c.validate());
  CHECK_THROWS_AS(parse_benchmark_config(R"({"enviroments": 4})"), DataError);
  CHECK_THROWS_AS(parse_benchmark_config(R"({"seed": "x"})"), DataError);
  CHECK_THROWS_AS(parse_benchmark_config("[1, 2"), DataError);
  BenchmarkConfig bad;
  bad.planners = {"grop", "rrt"};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.velocities = {0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("metrics aggregate raw rows per planner and group") {
  std::vector<RawRow> raw(4);
  raw[0] = {0, 0, "grop", 0.4, 10, "easy", 1, "north", 0.5, 20, 0, 3, 3, 22};
  raw[1] = {0, 1, "grop", 0.4, 2, "hard", 2, "south", 0.1, 30, -26, 3, 1, 31};
  raw[2] = {0, 0, "dvh", 0.4, 10, "easy", 3, "east", 0.6, 40, -16, 3, 2, 41};
  raw[3] = {0, 1, "dvh", 0.4, 2, "hard", -1, "", 0, 0, 0, 3, 0, 0};
  const auto m = aggregate_metrics(raw, {"grop", "dvh"});
  REQUIRE(m.size() == 6);
  CHECK(m[0].planner == "grop");
  CHECK(m[0].group == "easy");
  CHECK(m[2].group == "all");
  CHECK(m[2].completion_rate == doctest::Approx(4.0 / 6.0));
  CHECK(m[2].mean_time == doctest::Approx(26.5));
  CHECK(m[2].mean_feasibility == doctest::Approx(0.3));
  CHECK(m[5].completion_rate == doctest::Approx(2.0 / 6.0));

  const std::string csv = raw_csv(raw);
  CHECK(raw_csv(parse_raw_csv(csv)) == csv);
  CHECK_THROWS_AS(parse_raw_csv("nope\n"), DataError);
  CHECK_THROWS_AS(parse_raw_csv(csv + "1,2,3\n"), DataError);
}

TEST_CASE("small benchmark is complete and deterministic") {
  const BenchmarkConfig c = tiny_config();
  const BenchmarkResult a = run_benchmark(c);
  CHECK(a.raw.size() == 2u * 2u * 5u);
  CHECK(a.overlays.size() == 2u * 2u * 2u);
  for (const RawRow& r : a.raw) {
    CHECK(r.targets == 2);
    CHECK(r.successes <= r.targets);
    CHECK((r.group == "easy" || r.group == "normal" || r.group == "hard"));
    if (r.planner == "satisficing" && r.plan >= 0) CHECK(r.feasibility == 1.0);
  }
  const BenchmarkResult b = run_benchmark(c);
  CHECK(raw_csv(a.raw) == raw_csv(b.raw));

  const fs::path dir = fs::temp_directory_path() / "grop_test_bench";
  fs::remove_all(dir);
  emit_reports(a, dir);
  CHECK(slurp(dir / "raw.csv") == raw_csv(a.raw));
  CHECK(slurp(dir / "metrics.csv") == metrics_csv(a.metrics));
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(std::distance(fs::directory_iterator(dir / "overlays"), fs::directory_iterator{}) == 8);
  fs::remove_all(dir);
}

TEST_CASE("grop and fcn-planning agree when planning from the same heatmaps") {
  BenchmarkConfig c = tiny_config();
  c.overlays = false;
  const BenchmarkResult r = run_benchmark(c);
  for (std::size_t i = 0; i < r.raw.size(); i += 5) {
    REQUIRE(r.raw[i].planner == "grop");
    REQUIRE(r.raw[i + 4].planner == "fcn");
    CHECK(r.raw[i].plan == r.raw[i + 4].plan);
  }
}

TEST_CASE("scripted replay of the two-sided scenarios") {
  const ReplayReport t1 = replay_scenario(builtin_scenario("t1"));
  REQUIRE(t1.rows.size() == 2);
  CHECK(t1.selected == "east");
  CHECK(t1.rows[0].side == "south");
  CHECK(t1.rows[0].cost == doctest::Approx(7.5));
  CHECK(t1.rows[0].utility == doctest::Approx(7.58));
  CHECK(t1.rows[1].feasibility == doctest::Approx(0.721));
  CHECK(t1.rows[1].cost == doctest::Approx(19.333333));
  CHECK(t1.rows[1].utility == doctest::Approx(9.506667));
  const ReplayReport t2 = replay_scenario(builtin_scenario("t2"));
  CHECK(t2.selected == "south");
  CHECK(t2.rows[0].utility == doctest::Approx(13.3));
  CHECK(replay_scenario(builtin_scenario("t1"), 0.0).selected == "south");
  CHECK(replay_text(t1).find("selected: east") != std::string::npos);
  CHECK_THROWS_AS(builtin_scenario("t3"), std::invalid_argument);
}

TEST_CASE("bundled scenario files match the built-in scenarios") {
  for (const char* name : {"t1", "t2"}) {
    const Scenario file = parse_scenario(slurp(fs::path(GROP_SOURCE_DIR) / "scenarios" / (std::string(name) + ".txt")));
    const Scenario builtin = builtin_scenario(name);
    CHECK(write_scenario(file) == write_scenario(builtin));
    CHECK(write_scenario(parse_scenario(write_scenario(builtin))) == write_scenario(builtin));
  }
  CHECK_THROWS_AS(parse_scenario("name t1\n"), DataError);
  CHECK_THROWS_AS(parse_scenario("format: 1\nside a 0.5\n"), DataError);
  CHECK_THROWS_AS(parse_scenario("format: 1\ncolor red\n"), DataError);
  CHECK_THROWS_AS(parse_scenario("format: 1\nname x\n"), DataError);
  Scenario broken = builtin_scenario("t1");
  broken.sides[0].feasibility = 1.5;
  CHECK_THROWS_AS(replay_scenario(broken), std::invalid_argument);
}

TEST_CASE("switching velocity on the constructed two-sided task") {
  const SwitchingSweep s = switching_sweep(builtin_scenario("t1"));
  CHECK(s.predicted == doctest::Approx(7.1 / (40 * 0.344)));
  REQUIRE(s.observed.has_value());
  CHECK(std::abs(*s.observed - s.predicted) <= s.step + 1e-9);
  CHECK(s.points.size() == 31);
  for (const SwitchPoint& p : s.points) {
    CHECK(p.petlon == s.points.front().petlon);
    CHECK(p.dvh == s.points.front().dvh);
    CHECK(p.grop == (p.velocity < s.predicted ? "south" : "east"));
  }
  CHECK(s.points.front().petlon == "south");
  CHECK(s.points.front().dvh == "east");
  CHECK_THROWS_AS(switching_sweep(builtin_scenario("t1"), 0.2, 0.8, 0.0), std::invalid_argument);
}
