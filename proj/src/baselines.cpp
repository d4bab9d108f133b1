#include "grop/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "grop/rng.hpp"

namespace grop {

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::Satisficing: return "satisficing";
    case BaselineKind::Petlon: return "petlon";
    case BaselineKind::Dvh: return "dvh";
    case BaselineKind::FcnPlanning: return "fcn";
  }
  return "?";
}

BaselineKind parse_baseline(const std::string& s) {
  if (s == "satisficing") return BaselineKind::Satisficing;
  if (s == "petlon") return BaselineKind::Petlon;
  if (s == "dvh") return BaselineKind::Dvh;
  if (s == "fcn") return BaselineKind::FcnPlanning;
  throw std::invalid_argument("unknown baseline '" + s + "'");
}

std::size_t baseline_select(BaselineKind kind, const std::vector<TaskMotionPlan>& candidates, double bonus,
                            std::uint64_t seed) {
  if (candidates.empty()) throw UnsolvableError("no candidate plans");
  std::size_t best = 0;
  switch (kind) {
    case BaselineKind::Satisficing: {
      Rng rng(derive_seed(seed, {0x5A7}));
      std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
      return pick(rng);
    }
    case BaselineKind::Petlon:
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        if (candidates[i].cost < candidates[best].cost) best = i;
      }
      return best;
    case BaselineKind::Dvh:
      for (std::size_t i = 1; i < candidates.size(); ++i) {
        const TaskMotionPlan& c = candidates[i];
        const TaskMotionPlan& b = candidates[best];
        // Products taken in a different order may differ in the last bits.
        const double tie = 1e-12 * std::max(c.feasibility, b.feasibility);
        if (c.feasibility > b.feasibility + tie ||
            (std::abs(c.feasibility - b.feasibility) <= tie && c.cost < b.cost)) {
          best = i;
        }
      }
      return best;
    case BaselineKind::FcnPlanning: return select_plan(candidates, bonus);
  }
  return best;
}

PlanningResult baseline_plan(BaselineKind kind, Grounder& grounder, const PlanningResult& candidates,
                             std::uint64_t seed) {
  const PlannerConfig& config = grounder.config();
  const std::size_t chosen = baseline_select(kind, candidates.candidates, config.bonus, seed);
  TaskMotionPlan p = grounder.ground(candidates.candidates[chosen].task_plan, StandPolicy::Uniform,
                                     derive_seed(seed, {0xB45E, static_cast<std::uint64_t>(kind)}));
  if (kind == BaselineKind::Satisficing) {
    // Every action is taken to be equally feasible.
    for (PairGrounding& g : p.pairs) {
      if (g.evaluated && !g.gap) g.feasibility = 1.0;
    }
    p.feasibility = 1.0;
    p.utility = utility(p.feasibility, p.cost, config.bonus);
  }
  PlanningResult r;
  r.domain = candidates.domain;
  r.candidates = {std::move(p)};
  r.selected = 0;
  r.planner = to_string(kind);
  return r;
}

PlanningResult baseline_plan(BaselineKind kind, const Environment& env, const TaskSpec& task,
                             const HeatmapFn& heatmaps, const PlannerConfig& config) {
  Grounder g(env, task, heatmaps, config);
  const PlanningResult candidates = ground_candidates(g);
  return baseline_plan(kind, g, candidates, config.seed);
}

}  // namespace grop
