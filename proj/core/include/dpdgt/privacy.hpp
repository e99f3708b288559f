#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dpdgt/schedules.hpp"

namespace dpdgt {

/// l1 bounds on how far the perturbed agent's deviation estimate (phi) and
/// dual drive (eta) can drift between two coupled adjacent executions.
struct SensitivityTrajectory {
  std::vector<double> phi;  ///< k = 0 .. horizon
  std::vector<double> eta;
  std::size_t horizon = 0;
};

/// Iterates, from zero,
///   phi' = (1-gamma) phi + (alpha_k/mu) eta + alpha_k delta/mu
///   eta' = (2-gamma) phi + (1-phi_mix+alpha_k/mu) eta + alpha_k delta/mu
/// for k = 0 .. horizon-1.
SensitivityTrajectory sensitivity_dynamics(const ScheduleSet& s, double mu, double delta,
                                           std::size_t horizon);

enum class EtaMode { kClosedForm, kNumeric };
const char* to_string(EtaMode m) noexcept;

struct EtaBound {
  EtaMode mode = EtaMode::kNumeric;
  double value = 0.0;
  /// Numeric mode only. Iterations actually evaluated.
  std::size_t horizon = 0;
  /// Numeric mode only. True when eta stopped growing for the required
  /// stretch and a finite tail bound was found.
  bool certified = false;
  /// Numeric mode only. Bound valid for every k: the smallest over K of
  /// max(max_{l<=K} eta_l, 2 (max_{l<K} alpha_l (delta + eta_l) + alpha_K delta)
  /// / (mu gamma phi - 2 alpha_K)). Infinite when no K qualifies.
  double tail_bound = kDivergent;
};

struct EtaOptions {
  std::size_t max_horizon = 100000;
  /// Stop once eta has not exceeded its running maximum for this many steps
  /// and the tail bound is finite.
  std::size_t patience = 100;
};

/// Closed form: 2 alpha_0 delta / (mu gamma phi - alpha_0), which requires
/// alpha_0 < mu gamma phi (HypothesisViolation otherwise). Numeric: the
/// running supremum of eta_k.
EtaBound d_eta_bound(const ScheduleSet& s, double mu, double delta, EtaMode mode,
                     const EtaOptions& opts = {});

struct PrivacyReport {
  double mu = 0.0;
  double gamma = 0.0;
  double phi_mix = 0.0;
  double delta = 0.0;
  EtaMode method = EtaMode::kNumeric;
  EtaBound d_eta;
  double d_alpha_xi = kDivergent;
  double d_alpha_zeta = kDivergent;
  /// (delta + D_eta) / (mu gamma phi) * (D_alpha_xi + phi D_alpha_zeta);
  /// infinite when a tail sum diverges or D_eta is undefined.
  double epsilon = kDivergent;
  /// Names of the conditions that made epsilon infinite.
  std::vector<std::string> failures;

  bool finite() const;
};

/// Privacy budget accumulated over the whole observation sequence. Divergence
/// is reported in the result, never thrown.
PrivacyReport cumulative_epsilon(const ScheduleSet& s, double mu, double delta,
                                 EtaMode mode = EtaMode::kNumeric, const EtaOptions& opts = {});

struct ClosedFormInputs {
  double alpha0 = 0.0;
  double q = 0.0;
  double theta_xi0 = 0.0;
  double q_xi = 0.0;
  double theta_zeta0 = 0.0;
  double q_zeta = 0.0;
  double gamma = 0.0;
  double phi_mix = 0.0;
  double mu = 0.0;
  double delta = 0.0;

  static ClosedFormInputs from(const ScheduleSet& s, double mu, double delta);
};

/// alpha0 delta (g + alpha0) / (g (g - alpha0)) *
///   (q_xi / (theta_xi0 (q_xi - q)) + phi q_zeta / (theta_zeta0 (q_zeta - q))),
/// g = mu gamma phi. Throws HypothesisViolation unless alpha0 < g and
/// 0 < q < min(q_xi, q_zeta) < 1.
double closed_form_epsilon(const ClosedFormInputs& in);

}  // namespace dpdgt
