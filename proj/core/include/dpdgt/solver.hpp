#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpdgt/graph.hpp"
#include "dpdgt/problem.hpp"
#include "dpdgt/rng.hpp"
#include "dpdgt/schedules.hpp"

namespace dpdgt {

enum class Algorithm {
  kDpdgt,  ///< robust push-pull on the cumulative deviation estimate s
  kDdgt,   ///< conventional dual gradient tracking on the per-step estimate z
};

const char* to_string(Algorithm a) noexcept;
/// Accepts "dpdgt" and "ddgt"; throws std::invalid_argument otherwise.
Algorithm algorithm_from_string(const std::string& name);

/// Per-agent iterates, one row per agent, m columns.
///
/// For the baseline, `s` holds the per-step deviation estimate z.
struct SolverState {
  Matrix s;
  Matrix tilde_w;
  Matrix w;
  std::size_t k = 0;

  bool operator==(const SolverState& o) const {
    return k == o.k && s == o.s && tilde_w == o.tilde_w && w == o.w;
  }
};

/// Noise source shared by every agent of a run. Draw (agent, k, coordinate)
/// of a channel depends only on the seed, so DP-DGT and the baseline fed the
/// same seed see identical realisations.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed) : seed_(seed) {}

  /// n x m matrix of Laplace draws with scale theta; all zeros when theta == 0.
  Matrix draw(Channel channel, std::size_t k, double theta, std::size_t n, std::size_t m) const;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// One iteration: the next state, the noise drawn at iteration k and the
/// values that went over the wire (state plus noise).
struct StepOutput {
  SolverState next;
  Matrix xi;
  Matrix zeta;
  Matrix obs_s;  ///< s_k + xi_k (pushed along C)
  Matrix obs_w;  ///< tilde_w_k + zeta_k (pulled along R)
  double step = 0.0;  ///< alpha_k, or beta_k for the baseline
};

/// Allocation rows for a dual drive matrix.
Matrix allocate(const AllocationProblem& problem, const Matrix& tilde_w);

/// Zero deviation estimate and dual drive unless given; w_0 follows from the
/// dual drive.
SolverState initial_state(const AllocationProblem& problem,
                          const std::optional<Matrix>& s0 = std::nullopt,
                          const std::optional<Matrix>& tilde_w0 = std::nullopt);

/// Baseline start: z_{i,0} = -iota (w_{i,0} - d_i), so 1^T z_0 tracks the
/// initial mismatch.
SolverState baseline_initial_state(const AllocationProblem& problem, double iota,
                                   const std::optional<Matrix>& tilde_w0 = std::nullopt);

/// DP-DGT update from explicitly given transmitted values. The order is
/// s -> tilde_w -> w since each uses the one before:
///   s'  = (1-gamma) s + gamma C obs_s - alpha_k (w - d)
///   tw' = (1-phi) tw + phi R obs_w + (s' - s)
///   w'  = argmin_{w in W} F(w) - tw'^T w
StepOutput dpdgt_update(const SolverState& state, const AllocationProblem& problem,
                        const CommGraph& graph, const ScheduleSet& schedules, Matrix obs_s,
                        Matrix obs_w);

/// Draws xi_k, zeta_k (one draw per agent per channel, reused by every
/// recipient) and applies dpdgt_update.
StepOutput dpdgt_step(const SolverState& state, const AllocationProblem& problem,
                      const CommGraph& graph, const ScheduleSet& schedules,
                      const NoiseSource& noise);

/// Conventional baseline with noisy messages:
///   tw' = R (tw + zeta_k) + beta_k z
///   w'  = argmin_{w in W} F(w) - tw'^T w
///   z'  = C (z + xi_k) - iota (w' - w)
/// Noise scales come from `schedules.theta_*`.
StepOutput ddgt_baseline_step(const SolverState& state, const AllocationProblem& problem,
                              const CommGraph& graph, const ScheduleSet& schedules,
                              const BaselineSchedule& baseline, const NoiseSource& noise);

/// |1^T (s' - s) + alpha_k (sum w - sum d) - gamma 1^T xi_k|, maximised over
/// coordinates. Zero up to rounding for every DP-DGT step.
double tracking_residual(const SolverState& before, const StepOutput& step,
                         const AllocationProblem& problem, double gamma);

/// Quantities fixed for a problem/graph pair that every metric needs.
struct RunReference {
  Matrix w_star;
  Vector pi_r;
};
RunReference make_reference(const AllocationProblem& problem, const CommGraph& graph);

struct IterationMetrics {
  std::size_t iter = 0;
  double err_sq = 0.0;     ///< ||w_k - w*||_F^2
  double supply = 0.0;     ///< sum of all allocations
  double demand = 0.0;     ///< sum of all demands
  double consensus = 0.0;  ///< ||x_k - 1 xbar_k^T||_F with x = -tilde_w, xbar = x^T pi_R
  double dual_value = 0.0; ///< f(xbar_k)
  Matrix w;                ///< allocation snapshot

  bool operator==(const IterationMetrics&) const = default;
};

IterationMetrics compute_metrics(const SolverState& state, const AllocationProblem& problem,
                                 const RunReference& ref);

struct AuditRecord {
  std::size_t k = 0;  ///< iteration the noise belongs to
  SolverState next;
  Matrix xi;
  Matrix zeta;
  Matrix obs_s;
  Matrix obs_w;
};

struct RunOptions {
  Algorithm algorithm = Algorithm::kDpdgt;
  std::size_t n_iters = 1000;
  std::uint64_t seed = 0;
  /// Keep noise draws, observables and state snapshots (thinned past 10^4).
  bool audit = false;
  /// Keep one metrics row per iteration; switched off for bulk Monte-Carlo.
  bool keep_metrics = true;
  std::optional<Matrix> s0;
  std::optional<Matrix> tilde_w0;
  BaselineSchedule baseline;
};

struct RunTrace {
  Algorithm algorithm = Algorithm::kDpdgt;
  std::uint64_t seed = 0;
  std::size_t n_iters = 0;
  std::string config_echo;
  RunReference reference;
  IterationMetrics initial;
  std::vector<IterationMetrics> metrics;  ///< k = 1 .. n_iters
  std::vector<AuditRecord> audit;
  SolverState final_state;
  IterationMetrics terminal;
};

/// Audit thinning: every record up to 10^4, then every 10th.
bool keep_audit_record(std::size_t k) noexcept;

RunTrace run(const AllocationProblem& problem, const CommGraph& graph,
             const ScheduleSet& schedules, const RunOptions& options);
/// Same, with precomputed reference quantities.
RunTrace run(const AllocationProblem& problem, const CommGraph& graph,
             const ScheduleSet& schedules, const RunOptions& options, const RunReference& ref);

/// Original run and its adjacent twin under the coupling that keeps every
/// transmitted value identical: the twin sends exactly what the original
/// sent, i.e. its own state plus a shifted noise realisation for the target
/// agent and unchanged noise for everyone else.
struct CoupledRun {
  AdjacentProblem adjacent;
  std::vector<double> ds_l1;  ///< ||s_{i0,k} - s'_{i0,k}||_1, k = 0 .. n_iters
  std::vector<double> dw_l1;  ///< ||tw_{i0,k} - tw'_{i0,k}||_1
  /// Every non-target agent kept bit-identical state in both runs.
  bool others_identical = true;
  std::optional<std::size_t> first_mismatch;
  SolverState original_final;
  SolverState adjacent_final;
};

CoupledRun coupled_adjacent_run(const AllocationProblem& problem,
                                const AdjacencyPerturbation& perturbation,
                                const CommGraph& graph, const ScheduleSet& schedules,
                                std::size_t n_iters, std::uint64_t seed);

}  // namespace dpdgt
