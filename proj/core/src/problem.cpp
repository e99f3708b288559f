#include "dpdgt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dpdgt/errors.hpp"

namespace dpdgt {

QuadraticBoxCost::QuadraticBoxCost(double a, double b, double c, double lo, double hi)
    : a_(a), b_(b), c_(c), lo_(lo), hi_(hi) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("quadratic coefficient must be positive and finite");
  }
  if (!(lo <= hi)) throw std::invalid_argument("box requires lo <= hi");
  if (!std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument("cost coefficients must be finite");
  }
}

double QuadraticBoxCost::argmin(double tilde_w) const noexcept {
  return std::clamp((tilde_w - b_) / (2.0 * a_), lo_, hi_);
}

double QuadraticBoxCost::value(std::span<const double> w) const {
  double total = c_;
  for (double wj : w) total += a_ * wj * wj + b_ * wj;
  return total;
}

void QuadraticBoxCost::gradient(std::span<const double> w, std::span<double> out) const {
  for (std::size_t j = 0; j < w.size(); ++j) out[j] = 2.0 * a_ * w[j] + b_;
}

void QuadraticBoxCost::conjugate_argmin(std::span<const double> tilde_w,
                                        std::span<double> out) const {
  for (std::size_t j = 0; j < tilde_w.size(); ++j) out[j] = argmin(tilde_w[j]);
}

std::pair<double, double> QuadraticBoxCost::gradient_range() const {
  return {2.0 * a_ * lo_ + b_, 2.0 * a_ * hi_ + b_};
}

std::shared_ptr<const CostFunction> QuadraticBoxCost::shift_linear(double db) const {
  return std::make_shared<QuadraticBoxCost>(a_, b_ + db, c_, lo_, hi_);
}

AllocationProblem::AllocationProblem(std::vector<Agent> agents, std::size_t dim)
    : agents_(std::move(agents)), dim_(dim) {
  if (agents_.empty()) throw std::invalid_argument("problem needs at least one agent");
  if (dim_ == 0) throw std::invalid_argument("problem dimension must be positive");
  demand_ = Matrix::Zero(static_cast<Eigen::Index>(agents_.size()),
                         static_cast<Eigen::Index>(dim_));
  mu_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const Agent& agent = agents_[i];
    if (!agent.cost) throw std::invalid_argument("agent without a cost function");
    if (agent.demand.size() != dim_) {
      std::ostringstream msg;
      msg << "agent " << i << " demand has length " << agent.demand.size() << ", expected "
          << dim_;
      throw std::invalid_argument(msg.str());
    }
    for (std::size_t j = 0; j < dim_; ++j) {
      demand_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = agent.demand[j];
    }
    if (!agent.cost->degenerate()) mu_ = std::min(mu_, agent.cost->modulus());
  }
  // All agents pinned: nothing is transmitted that depends on a cost, so any
  // positive modulus of the pinned costs serves.
  if (!std::isfinite(mu_)) {
    for (const auto& agent : agents_) mu_ = std::min(mu_, agent.cost->modulus());
  }
}

bool AllocationProblem::slater_feasible() const {
  const Vector total = total_demand();
  double lo_sum = 0.0;
  double hi_sum = 0.0;
  bool interior = false;
  for (const auto& agent : agents_) {
    const auto [lo, hi] = agent.cost->bounds();
    lo_sum += lo;
    hi_sum += hi;
    interior = interior || lo < hi;
  }
  for (Eigen::Index j = 0; j < total.size(); ++j) {
    const double d = total(j);
    if (interior ? !(lo_sum < d && d < hi_sum) : d != lo_sum) return false;
  }
  return true;
}

double AllocationProblem::primal_cost(const Matrix& w) const {
  double total = 0.0;
  std::vector<double> row(dim_);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      row[j] = w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    total += agents_[i].cost->value(row);
  }
  return total;
}

AllocationProblem AllocationProblem::with_cost(std::size_t i,
                                               std::shared_ptr<const CostFunction> cost) const {
  std::vector<Agent> agents = agents_;
  agents.at(i).cost = std::move(cost);
  return AllocationProblem(std::move(agents), dim_);
}

double conjugate_argmin(const QuadraticBoxCost& cost, double tilde_w) {
  return cost.argmin(tilde_w);
}

double dual_gradient(const QuadraticBoxCost& cost, double demand, double x) {
  return demand - cost.argmin(-x);
}

void dual_gradient(const CostFunction& cost, std::span<const double> demand,
                   std::span<const double> x, std::span<double> out) {
  std::vector<double> neg_x(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) neg_x[j] = -x[j];
  cost.conjugate_argmin(neg_x, out);
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = demand[j] - out[j];
}

double dual_value(const AllocationProblem& problem, std::span<const double> x) {
  const std::size_t m = problem.dim();
  if (x.size() != m) throw std::invalid_argument("dual point has the wrong dimension");
  std::vector<double> neg_x(m);
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) neg_x[j] = -x[j];
  double total = 0.0;
  for (const auto& agent : problem.agents()) {
    // The supremum of -x^T w - F(w) is attained at the conjugate argmin.
    agent.cost->conjugate_argmin(neg_x, w);
    double term = -agent.cost->value(w);
    for (std::size_t j = 0; j < m; ++j) term += x[j] * (agent.demand[j] - w[j]);
    total += term;
  }
  return total;
}

Vector dual_gradient_sum(const AllocationProblem& problem, std::span<const double> x) {
  const std::size_t m = problem.dim();
  if (x.size() != m) throw std::invalid_argument("dual point has the wrong dimension");
  Vector total = Vector::Zero(static_cast<Eigen::Index>(m));
  std::vector<double> g(m);
  for (const auto& agent : problem.agents()) {
    dual_gradient(*agent.cost, agent.demand, x, g);
    for (std::size_t j = 0; j < m; ++j) total(static_cast<Eigen::Index>(j)) += g[j];
  }
  return total;
}

CentralizedSolution centralized_solve(const AllocationProblem& problem) {
  const std::size_t n = problem.n_agents();
  const std::size_t m = problem.dim();
  const Vector target = problem.total_demand();

  double lo_sum = 0.0;
  double hi_sum = 0.0;
  double nu_lo = std::numeric_limits<double>::infinity();
  double nu_hi = -std::numeric_limits<double>::infinity();
  for (const auto& agent : problem.agents()) {
    const auto [lo, hi] = agent.cost->bounds();
    lo_sum += lo;
    hi_sum += hi;
    const auto [g_lo, g_hi] = agent.cost->gradient_range();
    nu_lo = std::min(nu_lo, g_lo);
    nu_hi = std::max(nu_hi, g_hi);
  }
  for (Eigen::Index j = 0; j < target.size(); ++j) {
    if (target(j) < lo_sum || target(j) > hi_sum) {
      std::ostringstream msg;
      msg << "total demand " << target(j) << " lies outside the feasible supply range [" << lo_sum
          << ", " << hi_sum << "]; the Slater condition fails";
      throw InfeasibleProblem(msg.str());
    }
  }

  Vector lower = Vector::Constant(static_cast<Eigen::Index>(m), nu_lo - 1.0);
  Vector upper = Vector::Constant(static_cast<Eigen::Index>(m), nu_hi + 1.0);
  Vector nu = 0.5 * (lower + upper);
  std::vector<bool> done(m, false);
  std::vector<double> tilde(m);
  std::vector<double> w(m);
  Vector supply(static_cast<Eigen::Index>(m));

  CentralizedSolution out;
  constexpr std::size_t kMaxSteps = 400;
  for (; out.bisection_steps < kMaxSteps; ++out.bisection_steps) {
    for (std::size_t j = 0; j < m; ++j) tilde[j] = nu(static_cast<Eigen::Index>(j));
    supply.setZero();
    for (const auto& agent : problem.agents()) {
      agent.cost->conjugate_argmin(tilde, w);
      for (std::size_t j = 0; j < m; ++j) supply(static_cast<Eigen::Index>(j)) += w[j];
    }
    bool all_done = true;
    for (std::size_t j = 0; j < m; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double gap = supply(jj) - target(jj);
      const bool width_exhausted = upper(jj) - lower(jj) <= 4.0 *
          std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(nu(jj)));
      done[j] = std::abs(gap) <= 1e-9 * std::max(1.0, std::abs(target(jj))) || width_exhausted;
      if (done[j]) continue;
      all_done = false;
      if (gap > 0.0) {
        upper(jj) = nu(jj);
      } else {
        lower(jj) = nu(jj);
      }
      nu(jj) = 0.5 * (lower(jj) + upper(jj));
    }
    if (all_done) break;
  }

  out.multiplier = nu;
  out.w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) tilde[j] = nu(static_cast<Eigen::Index>(j));
  for (std::size_t i = 0; i < n; ++i) {
    problem.agents()[i].cost->conjugate_argmin(tilde, w);
    for (std::size_t j = 0; j < m; ++j) {
      out.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[j];
    }
  }
  return out;
}

AdjacentProblem make_adjacent(const AllocationProblem& problem,
                              const AdjacencyPerturbation& perturbation) {
  const std::size_t i0 = perturbation.target_agent;
  if (i0 >= problem.n_agents()) throw std::invalid_argument("adjacency target out of range");
  if (!(perturbation.delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  if (std::abs(perturbation.db) > perturbation.delta) {
    throw std::invalid_argument("perturbation exceeds the adjacency bound delta");
  }
  const CostFunction& original = problem.cost(i0);
  auto shifted = original.shift_linear(perturbation.db);
  if (shifted->bounds() != original.bounds()) {
    throw std::logic_error("adjacent cost changed the allocation domain");
  }

  // Gradient distance on the box; the shift is constant, so the box ends and
  // midpoint already give the supremum.
  const std::size_t m = problem.dim();
  const auto [lo, hi] = original.bounds();
  double distance = 0.0;
  std::vector<double> point(m);
  std::vector<double> g(m);
  std::vector<double> g_shift(m);
  for (double probe : {lo, 0.5 * (lo + hi), hi}) {
    std::fill(point.begin(), point.end(), probe);
    original.gradient(point, g);
    shifted->gradient(point, g_shift);
    for (std::size_t j = 0; j < m; ++j) distance = std::max(distance, std::abs(g[j] - g_shift[j]));
  }
  if (distance > perturbation.delta * (1.0 + 1e-12) + 1e-15) {
    throw std::logic_error("adjacent cost violates the gradient-distance bound");
  }
  return AdjacentProblem{problem.with_cost(i0, std::move(shifted)), distance};
}

}  // namespace dpdgt
