#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpdgt/config.hpp"
#include "dpdgt/graph.hpp"
#include "dpdgt/privacy.hpp"
#include "dpdgt/problem.hpp"
#include "dpdgt/schedules.hpp"
#include "dpdgt/solver.hpp"

namespace dpdgt {

/// Everything a config resolves to.
struct Scenario {
  AllocationProblem problem;
  CommGraph graph;
  ScheduleSet schedules;
  BaselineSchedule baseline;
};

/// Builds the problem, graph and schedules. Throws std::invalid_argument for
/// inconsistent sizes and InfeasibleProblem when the balance cannot be met.
Scenario build_scenario(const RunConfig& config);

/// Options for one run taken from the config.
RunOptions run_options(const RunConfig& config);

/// Metrics CSV: a comment header echoing the config on one line, then iter,
/// err_sq, supply, demand, consensus, dual_value and one allocation column per
/// non-degenerate agent (w<i>, or w<i>_<j> when m > 1, 1-based). One row per
/// iteration 1..n_iters.
void write_metrics_csv(std::ostream& out, const RunTrace& trace, const AllocationProblem& problem,
                       const std::string& config_echo);

/// Audit CSV: k, agent, coord, xi, zeta, obs_s, obs_w for every kept record.
void write_audit_csv(std::ostream& out, const RunTrace& trace);

/// Runs fn(i) for i in [0, count) on a bounded pool of worker threads.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Seed of replica r; shared by every grid point of a sweep so the points
/// differ only in the swept parameter.
std::uint64_t replica_seed(std::uint64_t root, std::size_t replica);

/// Mean and standard error of a sample.
struct SampleStats {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;
};
SampleStats sample_stats(const std::vector<double>& xs);

/// Two-sided 95% normal critical value.
inline constexpr double kZ95 = 1.959963984540054;

struct SweepPoint {
  double value = 0.0;
  SampleStats err_sq;
  /// 1/theta0 when sweeping theta0 (infinite at theta0 = 0), NaN otherwise.
  double inverse_theta0 = 0.0;
  /// Closed-form epsilon when its hypotheses hold, infinite otherwise.
  double epsilon = kDivergent;
  std::vector<double> terminal_err_sq;  ///< one entry per replica
};

struct SweepResult {
  std::string parameter;
  std::vector<double> grid;
  std::vector<SweepPoint> points;
  std::vector<std::uint64_t> seeds;
  std::size_t n_iters = 0;
  double mu = 0.0;
  double delta = 0.0;

  /// Paired difference point[i+1] - point[i] over the common replicas.
  SampleStats step_difference(std::size_t i) const;
};

/// Schedules with the swept parameter set to `value`. theta0 sets both noise
/// scales, alpha0 the initial step and q the step ratio.
ScheduleSet with_parameter(const ScheduleSet& s, const std::string& parameter, double value);

SweepResult run_sweep(const RunConfig& config, const Scenario& scenario);

struct CompareResult {
  std::size_t n_iters = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> dpdgt_terminal;  ///< per seed
  std::vector<double> ddgt_terminal;
  /// Mean err_sq over seeds, iterations 1..n_iters.
  std::vector<double> dpdgt_curve;
  std::vector<double> ddgt_curve;
  SampleStats dpdgt;
  SampleStats ddgt;
  /// ddgt - dpdgt per seed.
  SampleStats difference;

  /// DP-DGT below DDGT at 95% confidence (paired, one-sided).
  bool dpdgt_better() const;
};

CompareResult run_compare(const RunConfig& config, const Scenario& scenario);

/// Condition verdicts plus epsilon by both routes.
struct PrivacySummary {
  SpectralData spectral;
  ConditionVerdict verdict;
  PrivacyReport numeric;
  PrivacyReport closed_form_path;
  std::optional<double> closed_form;  ///< unset when its hypotheses fail
  std::string closed_form_error;
};

PrivacySummary privacy_summary(const Scenario& scenario, double delta);

// Subcommands. Each writes its files under `out_dir` and returns a short
// human-readable line for the terminal.
std::string cli_run(const RunConfig& config, const std::filesystem::path& out_dir);
std::string cli_sweep(const RunConfig& config, const std::filesystem::path& out_dir);
std::string cli_compare(const RunConfig& config, const std::filesystem::path& out_dir);
std::string cli_privacy(const RunConfig& config, const std::filesystem::path& out_dir);
std::string cli_solve(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace dpdgt
