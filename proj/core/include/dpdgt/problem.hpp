#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "dpdgt/graph.hpp"

namespace dpdgt {

/// Strongly convex, coordinate-separable local cost restricted to a box.
///
/// Everything the solvers need goes through this contract: the value, the
/// gradient, and the conjugate argmin that maps a dual drive to an allocation.
/// Spans have the problem dimension m.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual double value(std::span<const double> w) const = 0;
  virtual void gradient(std::span<const double> w, std::span<double> out) const = 0;
  /// argmin over the box of F(w) - tilde_w^T w. Total and unique.
  virtual void conjugate_argmin(std::span<const double> tilde_w, std::span<double> out) const = 0;
  /// Strong-convexity modulus.
  virtual double modulus() const = 0;
  /// True when the box is a single point; such agents never move.
  virtual bool degenerate() const = 0;
  /// Per-coordinate range of the partial derivative over the box: any
  /// multiplier outside it saturates the allocation at a bound.
  virtual std::pair<double, double> gradient_range() const = 0;
  /// Box bounds per coordinate.
  virtual std::pair<double, double> bounds() const = 0;
  /// F'(w) = F(w) + db * 1^T w, so grad F' - grad F = db everywhere.
  virtual std::shared_ptr<const CostFunction> shift_linear(double db) const = 0;
};

/// F(w) = sum_j (a w_j^2 + b w_j) + c on the box [lo, hi]^m.
class QuadraticBoxCost final : public CostFunction {
 public:
  /// Requires a > 0 and lo <= hi; throws std::invalid_argument otherwise.
  QuadraticBoxCost(double a, double b, double c, double lo, double hi);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  /// Scalar form: clamp((tilde_w - b) / (2a), lo, hi).
  double argmin(double tilde_w) const noexcept;

  double value(std::span<const double> w) const override;
  void gradient(std::span<const double> w, std::span<double> out) const override;
  void conjugate_argmin(std::span<const double> tilde_w, std::span<double> out) const override;
  double modulus() const override { return 2.0 * a_; }
  bool degenerate() const override { return lo_ == hi_; }
  std::pair<double, double> gradient_range() const override;
  std::pair<double, double> bounds() const override { return {lo_, hi_}; }
  std::shared_ptr<const CostFunction> shift_linear(double db) const override;

  bool operator==(const QuadraticBoxCost& o) const noexcept {
    return a_ == o.a_ && b_ == o.b_ && c_ == o.c_ && lo_ == o.lo_ && hi_ == o.hi_;
  }

 private:
  double a_;
  double b_;
  double c_;
  double lo_;
  double hi_;
};

struct Agent {
  std::shared_ptr<const CostFunction> cost;
  std::vector<double> demand;  ///< length m
};

/// min sum_i F_i(w_i)  s.t.  sum_i w_i = sum_i d_i,  w_i in W_i.
class AllocationProblem {
 public:
  AllocationProblem(std::vector<Agent> agents, std::size_t dim = 1);

  std::size_t n_agents() const noexcept { return agents_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Agent>& agents() const noexcept { return agents_; }
  const CostFunction& cost(std::size_t i) const { return *agents_.at(i).cost; }

  /// n x m demand matrix.
  const Matrix& demand() const noexcept { return demand_; }
  /// Column sums of the demand matrix (length m).
  Vector total_demand() const { return demand_.colwise().sum().transpose(); }
  /// Minimum modulus over agents whose box is not a single point.
  double mu() const noexcept { return mu_; }

  /// sum lo <= sum d <= sum hi per coordinate, strictly when some box has
  /// interior.
  bool slater_feasible() const;

  /// Sum of F_i over the rows of an n x m allocation.
  double primal_cost(const Matrix& w) const;

  /// Copy with agent i's cost replaced.
  AllocationProblem with_cost(std::size_t i, std::shared_ptr<const CostFunction> cost) const;

 private:
  std::vector<Agent> agents_;
  std::size_t dim_;
  Matrix demand_;
  double mu_;
};

/// Scalar conjugate argmin for the quadratic cost.
double conjugate_argmin(const QuadraticBoxCost& cost, double tilde_w);

/// d - argmin_w { F(w) + x w }: the local supply-demand mismatch seen from
/// the dual point x (scalar case).
double dual_gradient(const QuadraticBoxCost& cost, double demand, double x);
/// Same, vector form for any cost; `out` has length m.
void dual_gradient(const CostFunction& cost, std::span<const double> demand,
                   std::span<const double> x, std::span<double> out);

/// f(x) = sum_i [ sup_{w in W_i} (-x^T w - F_i(w)) + x^T d_i ].
double dual_value(const AllocationProblem& problem, std::span<const double> x);
/// Gradient of the dual objective, summed over agents (length m).
Vector dual_gradient_sum(const AllocationProblem& problem, std::span<const double> x);

struct CentralizedSolution {
  Matrix w;          ///< n x m optimal allocation
  Vector multiplier; ///< nu per coordinate (= -x*)
  std::size_t bisection_steps = 0;
};

/// KKT bisection on the balance multiplier. Throws InfeasibleProblem when the
/// total demand lies outside the boxes' total range.
CentralizedSolution centralized_solve(const AllocationProblem& problem);

struct AdjacencyPerturbation {
  std::size_t target_agent = 0;
  double delta = 0.0;  ///< allowed gradient distance
  double db = 0.0;     ///< shift of the target's linear coefficient, |db| <= delta
};

struct AdjacentProblem {
  AllocationProblem problem;
  double gradient_distance = 0.0;
};

/// Shifts the target's linear coefficient by db. Throws std::invalid_argument
/// when |db| > delta or the target index is out of range.
AdjacentProblem make_adjacent(const AllocationProblem& problem,
                              const AdjacencyPerturbation& perturbation);

}  // namespace dpdgt
