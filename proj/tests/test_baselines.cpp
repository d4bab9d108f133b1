#include <map>

#include "doctest.h"

#include "grop/baselines.hpp"
#include "grop/harness.hpp"

using namespace grop;

namespace {

TaskMotionPlan scored(double f, double c) {
  TaskMotionPlan p;
  p.feasibility = f;
  p.cost = c;
  return p;
}

}  // namespace

TEST_CASE("baseline names round trip") {
  for (BaselineKind k : {BaselineKind::Satisficing, BaselineKind::Petlon, BaselineKind::Dvh, BaselineKind::FcnPlanning}) {
    CHECK(parse_baseline(to_string(k)) == k);
  }
  CHECK(std::string(to_string(BaselineKind::FcnPlanning)) == "fcn");
  CHECK_THROWS_AS(parse_baseline("grop"), std::invalid_argument);
}

TEST_CASE("selection rules") {
  const std::vector<TaskMotionPlan> c{scored(0.5, 10), scored(0.9, 30), scored(0.2, 4), scored(0.9, 20)};
  CHECK(baseline_select(BaselineKind::Petlon, c, 40, 0) == 2);
  CHECK(baseline_select(BaselineKind::Dvh, c, 40, 0) == 3);
  CHECK(baseline_select(BaselineKind::FcnPlanning, c, 40, 0) == select_plan(c, 40));
  CHECK(baseline_select(BaselineKind::FcnPlanning, c, 1000, 0) == 3);
  CHECK_THROWS_AS(baseline_select(BaselineKind::Dvh, {}, 40, 0), UnsolvableError);

  // Equal products computed in a different order.
  const double a = 0.7 * 0.3 * 0.9, b = 0.9 * 0.7 * 0.3;
  const std::vector<TaskMotionPlan> near{scored(std::max(a, b), 50), scored(std::min(a, b), 20)};
  CHECK(baseline_select(BaselineKind::Dvh, near, 40, 0) == 1);
}

TEST_CASE("satisficing choice ignores feasibility and cost") {
  const Scenario t1 = builtin_scenario("t1");
  PlannerConfig config;
  config.velocity = 0.6;
  const PlanningResult r = ground_scripted(t1, config);
  REQUIRE(r.candidates.size() == 2);
  std::vector<TaskMotionPlan> flipped = r.candidates;
  std::swap(flipped[0].feasibility, flipped[1].feasibility);
  flipped[0].cost = 1000.0;
  std::map<std::size_t, int> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t i = baseline_select(BaselineKind::Satisficing, r.candidates, 40, seed);
    CHECK(i == baseline_select(BaselineKind::Satisficing, flipped, 40, seed));
    counts[i]++;
  }
  // Two-sided binomial at n = 1000: 4 standard deviations is about 63.
  CHECK(std::abs(counts[0] - 500) < 63);
  CHECK(counts[0] + counts[1] == 1000);
}

TEST_CASE("grop reduces to petlon-like at R = 0 and to dvh-like at large R") {
  for (std::uint64_t s = 0; s < 8; ++s) {
    const Environment env = random_environment(100 + s);
    const TaskSpec task = random_task(env, 100 + s);
    const HeatmapFn heatmaps = oracle_heatmaps(3, s);
    PlannerConfig config;
    config.seed = s;
    Grounder g(env, task, heatmaps, config);
    const PlanningResult cands = ground_candidates(g);
    CHECK(select_plan(cands.candidates, 0.0) == baseline_select(BaselineKind::Petlon, cands.candidates, 0.0, s));
    CHECK(select_plan(cands.candidates, 1e6) == baseline_select(BaselineKind::Dvh, cands.candidates, 1e6, s));
  }
}

TEST_CASE("baseline plans re-ground with uniform stands") {
  const Environment env = random_environment(77);
  const TaskSpec task = random_task(env, 77);
  PlannerConfig config;
  config.seed = 5;
  const HeatmapFn heatmaps = oracle_heatmaps(3, 5);
  Grounder g(env, task, heatmaps, config);
  const PlanningResult cands = ground_candidates(g);
  const auto reach = reachable_from(env.map(), env.map().to_cell(task.start.position()));
  for (BaselineKind k : {BaselineKind::Satisficing, BaselineKind::Petlon, BaselineKind::Dvh, BaselineKind::FcnPlanning}) {
    const PlanningResult r = baseline_plan(k, g, cands, 5);
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.planner == to_string(k));
    const TaskMotionPlan& p = r.best();
    const std::size_t chosen = baseline_select(k, cands.candidates, config.bonus, 5);
    CHECK(p.task_plan == cands.candidates[chosen].task_plan);
    for (const PairGrounding& pair : p.pairs) {
      if (p.task_plan.actions[pair.manipulation].kind != ActionKind::Unload || pair.gap) continue;
      const CellIndex c = env.map().to_cell(pair.stand.position());
      CHECK_FALSE(env.map().blocked(c));
      CHECK(reach(c.row, c.col));
      CHECK(g.locations()[static_cast<std::size_t>(pair.location)].contains(c));
    }
    if (k == BaselineKind::Satisficing) CHECK(p.feasibility == 1.0);
    const PlanningResult again = baseline_plan(k, g, cands, 5);
    CHECK(plan_report_json(again) == plan_report_json(r));
  }
}
