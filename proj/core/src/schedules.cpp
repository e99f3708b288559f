#include "dpdgt/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dpdgt/errors.hpp"

namespace dpdgt {

double GeometricSchedule::value(std::size_t k) const {
  return initial * std::pow(ratio, static_cast<double>(k));
}

void GeometricSchedule::validate(const char* name) const {
  if (!(initial >= 0.0) || !std::isfinite(initial)) {
    std::ostringstream msg;
    msg << name << ": initial value must be finite and nonnegative";
    throw std::invalid_argument(msg.str());
  }
  if (!(ratio > 0.0 && ratio < 1.0)) {
    std::ostringstream msg;
    msg << name << ": ratio must lie in (0, 1)";
    throw std::invalid_argument(msg.str());
  }
}

void ScheduleSet::validate() const {
  alpha.validate("alpha");
  theta_xi.validate("theta_xi");
  theta_zeta.validate("theta_zeta");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(phi > 0.0 && phi <= 1.0)) throw std::invalid_argument("phi must lie in (0, 1]");
}

void BaselineSchedule::validate() const {
  beta.validate("beta");
  if (!(iota > 0.0) || !std::isfinite(iota)) throw std::invalid_argument("iota must be positive");
}

double geometric_series(double scale, double ratio) {
  if (scale == 0.0) return 0.0;
  if (ratio >= 1.0) return kDivergent;
  return scale / (1.0 - ratio);
}

namespace {

// sum_k num_k^p / den_k^r style ratios reduce to one geometric series; zero
// numerators sum to zero and zero denominators diverge.
double ratio_series(double num0, double num_ratio, double den0, double den_ratio) {
  if (num0 == 0.0) return 0.0;
  if (den0 == 0.0) return kDivergent;
  return geometric_series(num0 / den0, num_ratio / den_ratio);
}

}  // namespace

bool ConditionVerdict::convergence() const {
  return alpha_summable && theta_xi_sq_summable && theta_zeta_sq_summable &&
         theta_xi_sq_over_alpha_summable && theta_zeta_sq_over_alpha_summable && lambda_exists;
}

bool ConditionVerdict::privacy() const {
  return alpha_summable && alpha_over_theta_xi_summable && alpha_over_theta_zeta_summable;
}

bool ConditionVerdict::closed_form() const {
  return step_below_contraction && ratio_ordering && privacy();
}

std::vector<std::string> ConditionVerdict::failures() const {
  std::vector<std::string> out;
  auto note = [&out](bool ok, const char* name) {
    if (!ok) out.emplace_back(name);
  };
  note(alpha_summable, "sum alpha_k finite");
  note(theta_xi_sq_summable, "sum theta_xi_k^2 finite");
  note(theta_zeta_sq_summable, "sum theta_zeta_k^2 finite");
  note(theta_xi_sq_over_alpha_summable, "sum theta_xi_k^2 / alpha_k finite");
  note(theta_zeta_sq_over_alpha_summable, "sum theta_zeta_k^2 / alpha_k finite");
  note(alpha_over_theta_xi_summable, "D_alpha_xi = sum alpha_k / theta_xi_k finite");
  note(alpha_over_theta_zeta_summable, "D_alpha_zeta = sum alpha_k / theta_zeta_k finite");
  note(lambda_exists, "q_c < q (step decay slower than push-graph contraction)");
  note(ratio_ordering, "max(q_c, q_xi^2, q_zeta^2) < q < min(q_xi, q_zeta) < 1");
  note(step_below_contraction, "alpha_0 < mu * gamma * phi");
  return out;
}

ConditionVerdict check_conditions(const ScheduleSet& s, double mu, double q_c_estimate) {
  s.validate();
  const double q = s.alpha.ratio;
  const double qx = s.theta_xi.ratio;
  const double qz = s.theta_zeta.ratio;
  const double a0 = s.alpha.initial;
  const double tx = s.theta_xi.initial;
  const double tz = s.theta_zeta.initial;

  ConditionVerdict v;
  v.q_c_estimate = q_c_estimate;
  v.mu = mu;
  v.mu_gamma_phi = mu * s.gamma * s.phi;

  v.sum_alpha = geometric_series(a0, q);
  v.sum_theta_xi_sq = geometric_series(tx * tx, qx * qx);
  v.sum_theta_zeta_sq = geometric_series(tz * tz, qz * qz);
  v.sum_theta_xi_sq_over_alpha = ratio_series(tx * tx, qx * qx, a0, q);
  v.sum_theta_zeta_sq_over_alpha = ratio_series(tz * tz, qz * qz, a0, q);
  v.sum_alpha_over_theta_xi = ratio_series(a0, q, tx, qx);
  v.sum_alpha_over_theta_zeta = ratio_series(a0, q, tz, qz);

  auto finite = [](double x) { return std::isfinite(x); };
  v.alpha_summable = finite(v.sum_alpha);
  v.theta_xi_sq_summable = finite(v.sum_theta_xi_sq);
  v.theta_zeta_sq_summable = finite(v.sum_theta_zeta_sq);
  v.theta_xi_sq_over_alpha_summable = finite(v.sum_theta_xi_sq_over_alpha);
  v.theta_zeta_sq_over_alpha_summable = finite(v.sum_theta_zeta_sq_over_alpha);
  v.alpha_over_theta_xi_summable = finite(v.sum_alpha_over_theta_xi);
  v.alpha_over_theta_zeta_summable = finite(v.sum_alpha_over_theta_zeta);

  v.lambda_exists = a0 > 0.0 && q_c_estimate < q;
  v.ratio_ordering = std::max({q_c_estimate, qx * qx, qz * qz}) < q && q < std::min(qx, qz) &&
                     std::max(qx, qz) < 1.0;
  v.step_below_contraction = a0 < v.mu_gamma_phi;
  return v;
}

double alpha_over_theta_sum(const GeometricSchedule& alpha, const GeometricSchedule& theta) {
  const double value = ratio_series(alpha.initial, alpha.ratio, theta.initial, theta.ratio);
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "sum alpha_k / theta_k diverges (q = " << alpha.ratio
        << ", noise ratio = " << theta.ratio << ", noise scale = " << theta.initial << ")";
    throw HypothesisViolation(msg.str());
  }
  return value;
}

TailSums tail_sums(const ScheduleSet& s) {
  return {alpha_over_theta_sum(s.alpha, s.theta_xi), alpha_over_theta_sum(s.alpha, s.theta_zeta)};
}

SeriesResult numeric_series(const std::function<double(std::size_t)>& term,
                            const SeriesOptions& opts) {
  SeriesResult out;
  const std::size_t window = std::max<std::size_t>(1, opts.window);
  // Ring of the last `window` partial sums.
  std::vector<double> ring(window, 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < opts.max_terms; ++k) {
    sum += term(k);
    const double oldest = ring[k % window];
    ring[k % window] = sum;
    out.terms = k + 1;
    if (!std::isfinite(sum)) break;
    if (k >= window && std::abs(sum - oldest) <= opts.cauchy_tolerance * std::max(1.0, std::abs(sum))) {
      out.converged = true;
      break;
    }
  }
  out.partial_sum = sum;
  return out;
}

}  // namespace dpdgt
