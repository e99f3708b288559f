#pragma once

#include <string>

#include "dpdgt/graph.hpp"
#include "dpdgt/problem.hpp"
#include "dpdgt/schedules.hpp"

namespace dpdgt::presets {

/// 14-bus economic dispatch: generators at buses 1, 2, 3, 6, 8 with the
/// quadratic costs of the benchmark table, the remaining buses as load-only
/// agents with the box [0, 0]. Total demand 361 MW.
AllocationProblem ieee14_problem();

/// 0-based agent indices of the generator buses.
inline constexpr std::size_t kIeee14Generators[] = {0, 1, 2, 5, 7};

/// Benchmark links as 1-based (u, v) pairs, read as a link from u to v.
EdgeList ieee14_links();

/// Each link u -> v lets v pull from u and lets u push to v, so both the pull
/// list and the push list get the 0-based entry (v, u).
CommGraph ieee14_graph();

/// Step and noise schedules used for the convergence experiments.
ScheduleSet ieee14_convergence_schedules();
/// Step and noise schedules used for the algorithm comparison.
ScheduleSet ieee14_comparison_schedules();

/// Named lookups; throw std::invalid_argument for unknown names.
AllocationProblem problem_by_name(const std::string& name);
CommGraph graph_by_name(const std::string& name);
ScheduleSet schedules_by_name(const std::string& name);

}  // namespace dpdgt::presets
