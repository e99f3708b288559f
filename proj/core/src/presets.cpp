#include "dpdgt/presets.hpp"

#include <array>
#include <memory>
#include <stdexcept>

namespace dpdgt::presets {

namespace {

struct GeneratorRow {
  std::size_t bus;  // 1-based
  double a, b, lo, hi;
};

constexpr std::array<GeneratorRow, 5> kGenerators{{
    {1, 0.04, 2.0, 0.0, 80.0},
    {2, 0.03, 3.0, 0.0, 90.0},
    {3, 0.035, 4.0, 0.0, 70.0},
    {6, 0.03, 4.0, 0.0, 70.0},
    {8, 0.04, 2.5, 0.0, 80.0},
}};

constexpr std::array<double, 14> kDemand{0, 9, 56, 55, 27, 27, 0, 0, 8, 24, 53, 46, 16, 40};

}  // namespace

AllocationProblem ieee14_problem() {
  // Load-only buses have a constant cost on a single point; a = 1 only keeps
  // the cost contract happy and never influences an allocation.
  auto load = std::make_shared<const QuadraticBoxCost>(1.0, 0.0, 0.0, 0.0, 0.0);
  std::vector<Agent> agents(kDemand.size());
  for (std::size_t i = 0; i < kDemand.size(); ++i) agents[i] = {load, {kDemand[i]}};
  for (const auto& g : kGenerators) {
    agents[g.bus - 1].cost = std::make_shared<const QuadraticBoxCost>(g.a, g.b, 0.0, g.lo, g.hi);
  }
  return AllocationProblem(std::move(agents), 1);
}

EdgeList ieee14_links() {
  EdgeList links;
  for (std::size_t i = 1; i <= 12; ++i) {
    links.emplace_back(i, i + 1);
    links.emplace_back(i, i + 2);
  }
  const EdgeList extra{{13, 14}, {13, 1}, {14, 1}, {1, 7}, {2, 8}, {3, 2},
                       {3, 9},   {4, 10}, {5, 2},  {5, 11}, {6, 12}};
  links.insert(links.end(), extra.begin(), extra.end());
  return links;
}

CommGraph ieee14_graph() {
  EdgeList edges;
  for (const auto& [u, v] : ieee14_links()) edges.emplace_back(v - 1, u - 1);
  return build_uniform_weights(14, edges, edges);
}

ScheduleSet ieee14_convergence_schedules() {
  ScheduleSet s;
  s.alpha = {0.015, 0.991};
  s.theta_xi = {0.01, 0.995};
  s.theta_zeta = {0.01, 0.995};
  s.gamma = 0.8;
  s.phi = 0.7;
  return s;
}

ScheduleSet ieee14_comparison_schedules() {
  ScheduleSet s = ieee14_convergence_schedules();
  s.alpha = {0.034, 0.99};
  return s;
}

AllocationProblem problem_by_name(const std::string& name) {
  if (name == "ieee14") return ieee14_problem();
  throw std::invalid_argument("unknown problem preset '" + name + "'");
}

CommGraph graph_by_name(const std::string& name) {
  if (name == "ieee14") return ieee14_graph();
  throw std::invalid_argument("unknown graph preset '" + name + "'");
}

ScheduleSet schedules_by_name(const std::string& name) {
  if (name == "ieee14-convergence") return ieee14_convergence_schedules();
  if (name == "ieee14-comparison") return ieee14_comparison_schedules();
  throw std::invalid_argument("unknown schedule preset '" + name + "'");
}

}  // namespace dpdgt::presets
