#pragma once

#include <string>

#include "grop/planner.hpp"

namespace grop {

enum class BaselineKind { Satisficing, Petlon, Dvh, FcnPlanning };

const char* to_string(BaselineKind k);
BaselineKind parse_baseline(const std::string& s);

/// Selection rule of a baseline over grounded candidates.
///
/// Satisficing picks uniformly at random by seed, petlon-like the minimum cost,
/// dvh-like the maximum feasibility (lower cost on ties), fcn-planning-like the maximum
/// utility. Remaining ties go to the earlier plan.
std::size_t baseline_select(BaselineKind kind, const std::vector<TaskMotionPlan>& candidates, double bonus,
                            std::uint64_t seed);

/// Selects over `candidates` (grounded by `grounder` with heatmap-weighted stands), then
/// re-grounds the chosen task plan with navigation goals drawn uniformly from the free,
/// reachable cells of each side near the target.
PlanningResult baseline_plan(BaselineKind kind, Grounder& grounder, const PlanningResult& candidates,
                             std::uint64_t seed);

/// Standalone form: enumerates and grounds the candidates itself.
PlanningResult baseline_plan(BaselineKind kind, const Environment& env, const TaskSpec& task,
                             const HeatmapFn& heatmaps, const PlannerConfig& config);

}  // namespace grop
