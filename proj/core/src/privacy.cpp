#include "dpdgt/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpdgt/errors.hpp"

namespace dpdgt {
namespace {

void check_inputs(const ScheduleSet& s, double mu, double delta) {
  s.validate();
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be nonnegative");
  }
}

}  // namespace

SensitivityTrajectory sensitivity_dynamics(const ScheduleSet& s, double mu, double delta,
                                           std::size_t horizon) {
  check_inputs(s, mu, delta);
  if (horizon == 0) throw std::invalid_argument("horizon must be at least 1");
  SensitivityTrajectory out;
  out.horizon = horizon;
  out.phi.assign(horizon + 1, 0.0);
  out.eta.assign(horizon + 1, 0.0);
  for (std::size_t k = 0; k < horizon; ++k) {
    const double a = s.alpha.value(k) / mu;
    const double p = out.phi[k];
    const double e = out.eta[k];
    out.phi[k + 1] = (1.0 - s.gamma) * p + a * e + a * delta;
    out.eta[k + 1] = (2.0 - s.gamma) * p + (1.0 - s.phi + a) * e + a * delta;
  }
  return out;
}

const char* to_string(EtaMode m) noexcept {
  return m == EtaMode::kClosedForm ? "closed_form" : "numeric";
}

EtaBound d_eta_bound(const ScheduleSet& s, double mu, double delta, EtaMode mode,
                     const EtaOptions& opts) {
  check_inputs(s, mu, delta);
  const double g = mu * s.gamma * s.phi;
  EtaBound out;
  out.mode = mode;

  if (mode == EtaMode::kClosedForm) {
    const double a0 = s.alpha.initial;
    if (!(a0 < g)) {
      throw HypothesisViolation("closed-form D_eta needs alpha_0 < mu*gamma*phi");
    }
    out.value = 2.0 * a0 * delta / (g - a0);
    return out;
  }

  if (opts.max_horizon == 0) throw std::invalid_argument("max_horizon must be at least 1");
  // Streaming version of sensitivity_dynamics so the horizon can stop early.
  double p = 0.0;
  double e = 0.0;
  double sup_eta = 0.0;
  double max_forcing = 0.0;  // max_{l<K} alpha_l (delta + eta_l)
  std::size_t since_new_max = 0;
  std::size_t k = 0;
  for (; k < opts.max_horizon; ++k) {
    const double alpha = s.alpha.value(k);
    // Tail bound anchored at K = k, using the eta values seen so far.
    if (2.0 * alpha < g) {
      const double anchored = 2.0 * (max_forcing + alpha * delta) / (g - 2.0 * alpha);
      out.tail_bound = std::min(out.tail_bound, std::max(sup_eta, anchored));
    }
    if (since_new_max >= opts.patience && std::isfinite(out.tail_bound)) {
      out.certified = true;
      break;
    }
    max_forcing = std::max(max_forcing, alpha * (delta + e));
    const double a = alpha / mu;
    const double next_p = (1.0 - s.gamma) * p + a * e + a * delta;
    const double next_e = (2.0 - s.gamma) * p + (1.0 - s.phi + a) * e + a * delta;
    p = next_p;
    e = next_e;
    if (e > sup_eta) {
      sup_eta = e;
      since_new_max = 0;
    } else {
      ++since_new_max;
    }
  }
  out.horizon = k;
  out.value = sup_eta;
  return out;
}

bool PrivacyReport::finite() const { return std::isfinite(epsilon); }

PrivacyReport cumulative_epsilon(const ScheduleSet& s, double mu, double delta, EtaMode mode,
                                 const EtaOptions& opts) {
  check_inputs(s, mu, delta);
  PrivacyReport r;
  r.mu = mu;
  r.gamma = s.gamma;
  r.phi_mix = s.phi;
  r.delta = delta;
  r.method = mode;

  const ConditionVerdict v = check_conditions(s, mu, 0.0);
  r.d_alpha_xi = v.sum_alpha_over_theta_xi;
  r.d_alpha_zeta = v.sum_alpha_over_theta_zeta;
  if (!v.alpha_over_theta_xi_summable) r.failures.emplace_back("alpha_over_theta_xi_summable");
  if (!v.alpha_over_theta_zeta_summable) {
    r.failures.emplace_back("alpha_over_theta_zeta_summable");
  }

  try {
    r.d_eta = d_eta_bound(s, mu, delta, mode, opts);
  } catch (const HypothesisViolation&) {
    r.d_eta.mode = mode;
    r.d_eta.value = kDivergent;
    r.failures.emplace_back("step_below_contraction");
  }

  if (!r.failures.empty()) return r;
  const double g = mu * s.gamma * s.phi;
  r.epsilon = (delta + r.d_eta.value) / g * (r.d_alpha_xi + s.phi * r.d_alpha_zeta);
  return r;
}

ClosedFormInputs ClosedFormInputs::from(const ScheduleSet& s, double mu, double delta) {
  return {s.alpha.initial, s.alpha.ratio, s.theta_xi.initial, s.theta_xi.ratio,
          s.theta_zeta.initial, s.theta_zeta.ratio, s.gamma, s.phi, mu, delta};
}

double closed_form_epsilon(const ClosedFormInputs& in) {
  if (!(in.mu > 0.0) || !(in.gamma > 0.0) || !(in.phi_mix > 0.0) || !(in.delta >= 0.0) ||
      !(in.theta_xi0 > 0.0) || !(in.theta_zeta0 > 0.0) || !(in.alpha0 > 0.0)) {
    throw std::invalid_argument("closed-form epsilon needs positive scales and delta >= 0");
  }
  const double g = in.mu * in.gamma * in.phi_mix;
  if (!(in.alpha0 < g)) {
    throw HypothesisViolation("closed-form epsilon needs alpha_0 < mu*gamma*phi");
  }
  // The squared-ratio ordering only matters for convergence and is reported by
  // check_conditions; the series here needs the step to decay faster than the noise.
  const double hi = std::min(in.q_xi, in.q_zeta);
  if (!(in.q > 0.0 && in.q < hi && hi < 1.0)) {
    throw HypothesisViolation("closed-form epsilon needs 0 < q < min(q_xi, q_zeta) < 1");
  }
  const double prefactor = in.alpha0 * in.delta * (g + in.alpha0) / (g * (g - in.alpha0));
  return prefactor * (in.q_xi / (in.theta_xi0 * (in.q_xi - in.q)) +
                      in.phi_mix * in.q_zeta / (in.theta_zeta0 * (in.q_zeta - in.q)));
}

}  // namespace dpdgt
