#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace dpdgt {

/// value(k) = initial * ratio^k.
///
/// A zero initial value is accepted and means "switched off" (no step, or no
/// noise); otherwise the sequence is positive and strictly decreasing.
struct GeometricSchedule {
  double initial = 0.0;
  double ratio = 0.5;

  double value(std::size_t k) const;
  /// Throws std::invalid_argument unless initial >= 0 and 0 < ratio < 1.
  void validate(const char* name) const;

  bool operator==(const GeometricSchedule&) const = default;
};

/// Step sizes, noise scales and mixing parameters for one DP-DGT run.
struct ScheduleSet {
  GeometricSchedule alpha{0.015, 0.991};
  GeometricSchedule theta_xi{0.01, 0.995};
  GeometricSchedule theta_zeta{0.01, 0.995};
  double gamma = 0.8;
  double phi = 0.7;

  /// Throws std::invalid_argument on any out-of-range field.
  void validate() const;

  bool operator==(const ScheduleSet&) const = default;
};

/// Step sizes of the conventional (non-robust) dual gradient tracking baseline:
/// the dual drive takes beta_k times the deviation estimate and the estimate
/// is corrected by iota times the allocation change.
struct BaselineSchedule {
  GeometricSchedule beta{1.0, 0.99};
  double iota = 0.034;

  void validate() const;
  bool operator==(const BaselineSchedule&) const = default;
};

inline constexpr double kDivergent = std::numeric_limits<double>::infinity();

/// Sum over k >= 0 of scale * ratio^k; kDivergent when ratio >= 1 and scale > 0.
double geometric_series(double scale, double ratio);

/// Every summability quantity the convergence and privacy guarantees ask for,
/// evaluated in closed form. Divergent sums are reported as kDivergent.
struct ConditionVerdict {
  double sum_alpha = 0.0;
  double sum_theta_xi_sq = 0.0;
  double sum_theta_zeta_sq = 0.0;
  double sum_theta_xi_sq_over_alpha = 0.0;
  double sum_theta_zeta_sq_over_alpha = 0.0;
  double sum_alpha_over_theta_xi = 0.0;   ///< D_{alpha,xi}
  double sum_alpha_over_theta_zeta = 0.0; ///< D_{alpha,zeta}

  double q_c_estimate = 0.0;
  double mu = 0.0;
  double mu_gamma_phi = 0.0;

  bool alpha_summable = false;
  bool theta_xi_sq_summable = false;
  bool theta_zeta_sq_summable = false;
  bool theta_xi_sq_over_alpha_summable = false;
  bool theta_zeta_sq_over_alpha_summable = false;
  bool alpha_over_theta_xi_summable = false;
  bool alpha_over_theta_zeta_summable = false;
  /// Step-size decay no faster than the push-graph contraction: for a geometric
  /// schedule this is q_c < q, certified with beta = 1 and k0 = 0.
  bool lambda_exists = false;
  double certified_beta = 1.0;
  std::size_t certified_k0 = 0;
  /// max(q_c, q_xi^2, q_zeta^2) < q < min(q_xi, q_zeta) < 1.
  bool ratio_ordering = false;
  /// alpha_0 < mu * gamma * phi.
  bool step_below_contraction = false;

  /// Almost-sure convergence to a neighbourhood of the optimum.
  bool convergence() const;
  /// Finite cumulative privacy budget.
  bool privacy() const;
  /// Hypotheses of the geometric closed-form privacy budget.
  bool closed_form() const;
  /// Names of the conditions that fail, in a fixed order.
  std::vector<std::string> failures() const;
};

ConditionVerdict check_conditions(const ScheduleSet& s, double mu, double q_c_estimate);

struct TailSums {
  double d_alpha_xi = 0.0;
  double d_alpha_zeta = 0.0;
};

/// Closed-form sum over k of alpha_k / theta_k for a pair of geometric
/// schedules. Throws HypothesisViolation when the series diverges.
double alpha_over_theta_sum(const GeometricSchedule& alpha, const GeometricSchedule& theta);

/// D_{alpha,xi} and D_{alpha,zeta}. Throws HypothesisViolation unless
/// q < q_xi and q < q_zeta (and both noise scales are switched on).
TailSums tail_sums(const ScheduleSet& s);

/// Numeric series evaluation for arbitrary user-supplied sequences.
struct SeriesOptions {
  std::size_t max_terms = 1000000;
  /// Declared convergent when the last `window` terms add less than this
  /// (relative to max(1, |partial sum|)).
  double cauchy_tolerance = 1e-9;
  std::size_t window = 1000;
};

struct SeriesResult {
  double partial_sum = 0.0;
  std::size_t terms = 0;
  bool converged = false;
};

/// Partial sums of term(k), k = 0, 1, ..., stopping once the Cauchy window
/// criterion holds. Heuristic: slowly convergent series (e.g. 1/k^2) may be
/// declared divergent.
SeriesResult numeric_series(const std::function<double(std::size_t)>& term,
                            const SeriesOptions& opts = {});

}  // namespace dpdgt
