#include "dpdgt/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace dpdgt {
namespace {

Eigen::Index rows(const AllocationProblem& p) { return static_cast<Eigen::Index>(p.n_agents()); }
Eigen::Index cols(const AllocationProblem& p) { return static_cast<Eigen::Index>(p.dim()); }

void check_state(const SolverState& state, const AllocationProblem& problem,
                 const CommGraph& graph) {
  if (graph.n_agents() != problem.n_agents()) {
    throw std::invalid_argument("graph and problem disagree on the number of agents");
  }
  const Eigen::Index n = rows(problem);
  const Eigen::Index m = cols(problem);
  for (const Matrix* mat : {&state.s, &state.tilde_w, &state.w}) {
    if (mat->rows() != n || mat->cols() != m) {
      throw std::invalid_argument("solver state has the wrong dimensions");
    }
  }
}

void check_shape(const Matrix& mat, const AllocationProblem& problem, const char* what) {
  if (mat.rows() != rows(problem) || mat.cols() != cols(problem)) {
    throw std::invalid_argument(std::string(what) + " has the wrong dimensions");
  }
}

}  // namespace

const char* to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::kDpdgt:
      return "dpdgt";
    case Algorithm::kDdgt:
      return "ddgt";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "dpdgt") return Algorithm::kDpdgt;
  if (name == "ddgt") return Algorithm::kDdgt;
  throw std::invalid_argument("unknown algorithm '" + name + "' (expected dpdgt or ddgt)");
}

Matrix NoiseSource::draw(Channel channel, std::size_t k, double theta, std::size_t n,
                         std::size_t m) const {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  if (theta == 0.0) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const NoiseStream stream(seed_, i, channel);
    for (std::size_t j = 0; j < m; ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = stream.laplace(theta, k, j);
    }
  }
  return out;
}

Matrix allocate(const AllocationProblem& problem, const Matrix& tilde_w) {
  check_shape(tilde_w, problem, "dual drive");
  const std::size_t m = problem.dim();
  Matrix w(tilde_w.rows(), tilde_w.cols());
  std::vector<double> in(m);
  std::vector<double> out(m);
  for (std::size_t i = 0; i < problem.n_agents(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < m; ++j) in[j] = tilde_w(ii, static_cast<Eigen::Index>(j));
    problem.cost(i).conjugate_argmin(in, out);
    for (std::size_t j = 0; j < m; ++j) w(ii, static_cast<Eigen::Index>(j)) = out[j];
  }
  return w;
}

SolverState initial_state(const AllocationProblem& problem, const std::optional<Matrix>& s0,
                          const std::optional<Matrix>& tilde_w0) {
  SolverState state;
  state.s = s0 ? *s0 : Matrix::Zero(rows(problem), cols(problem));
  state.tilde_w = tilde_w0 ? *tilde_w0 : Matrix::Zero(rows(problem), cols(problem));
  check_shape(state.s, problem, "initial deviation estimate");
  state.w = allocate(problem, state.tilde_w);
  state.k = 0;
  return state;
}

SolverState baseline_initial_state(const AllocationProblem& problem, double iota,
                                   const std::optional<Matrix>& tilde_w0) {
  SolverState state = initial_state(problem, std::nullopt, tilde_w0);
  state.s = -iota * (state.w - problem.demand());
  return state;
}

StepOutput dpdgt_update(const SolverState& state, const AllocationProblem& problem,
                        const CommGraph& graph, const ScheduleSet& schedules, Matrix obs_s,
                        Matrix obs_w) {
  check_state(state, problem, graph);
  check_shape(obs_s, problem, "pushed values");
  check_shape(obs_w, problem, "pulled values");
  const double alpha = schedules.alpha.value(state.k);
  const double gamma = schedules.gamma;
  const double phi = schedules.phi;

  StepOutput out;
  out.step = alpha;
  out.next.s = (1.0 - gamma) * state.s + gamma * (graph.c() * obs_s) -
               alpha * (state.w - problem.demand());
  out.next.tilde_w =
      (1.0 - phi) * state.tilde_w + phi * (graph.r() * obs_w) + (out.next.s - state.s);
  out.next.w = allocate(problem, out.next.tilde_w);
  out.next.k = state.k + 1;
  out.xi = obs_s - state.s;
  out.zeta = obs_w - state.tilde_w;
  out.obs_s = std::move(obs_s);
  out.obs_w = std::move(obs_w);
  return out;
}

StepOutput dpdgt_step(const SolverState& state, const AllocationProblem& problem,
                      const CommGraph& graph, const ScheduleSet& schedules,
                      const NoiseSource& noise) {
  check_state(state, problem, graph);
  const std::size_t n = problem.n_agents();
  const std::size_t m = problem.dim();
  Matrix xi = noise.draw(Channel::kTracking, state.k, schedules.theta_xi.value(state.k), n, m);
  Matrix zeta = noise.draw(Channel::kDual, state.k, schedules.theta_zeta.value(state.k), n, m);
  StepOutput out =
      dpdgt_update(state, problem, graph, schedules, state.s + xi, state.tilde_w + zeta);
  // Keep the exact draws rather than the recovered differences.
  out.xi = std::move(xi);
  out.zeta = std::move(zeta);
  return out;
}

StepOutput ddgt_baseline_step(const SolverState& state, const AllocationProblem& problem,
                              const CommGraph& graph, const ScheduleSet& schedules,
                              const BaselineSchedule& baseline, const NoiseSource& noise) {
  check_state(state, problem, graph);
  const std::size_t n = problem.n_agents();
  const std::size_t m = problem.dim();
  const double beta = baseline.beta.value(state.k);

  StepOutput out;
  out.step = beta;
  out.xi = noise.draw(Channel::kTracking, state.k, schedules.theta_xi.value(state.k), n, m);
  out.zeta = noise.draw(Channel::kDual, state.k, schedules.theta_zeta.value(state.k), n, m);
  out.obs_s = state.s + out.xi;
  out.obs_w = state.tilde_w + out.zeta;
  out.next.tilde_w = graph.r() * out.obs_w + beta * state.s;
  out.next.w = allocate(problem, out.next.tilde_w);
  out.next.s = graph.c() * out.obs_s - baseline.iota * (out.next.w - state.w);
  out.next.k = state.k + 1;
  return out;
}

double tracking_residual(const SolverState& before, const StepOutput& step,
                         const AllocationProblem& problem, double gamma) {
  const Eigen::RowVectorXd lhs = (step.next.s - before.s).colwise().sum();
  const Eigen::RowVectorXd mismatch =
      before.w.colwise().sum() - problem.demand().colwise().sum();
  const Eigen::RowVectorXd noise = gamma * step.xi.colwise().sum();
  return (lhs + step.step * mismatch - noise).cwiseAbs().maxCoeff();
}

RunReference make_reference(const AllocationProblem& problem, const CommGraph& graph) {
  if (graph.n_agents() != problem.n_agents()) {
    throw std::invalid_argument("graph and problem disagree on the number of agents");
  }
  return {centralized_solve(problem).w, left_perron_vector(graph.r())};
}

IterationMetrics compute_metrics(const SolverState& state, const AllocationProblem& problem,
                                 const RunReference& ref) {
  IterationMetrics out;
  out.iter = state.k;
  out.err_sq = (state.w - ref.w_star).squaredNorm();
  out.supply = state.w.sum();
  out.demand = problem.demand().sum();
  const Matrix x = -state.tilde_w;
  const Vector x_bar = x.transpose() * ref.pi_r;
  out.consensus = (x.rowwise() - x_bar.transpose()).norm();
  out.dual_value = dual_value(problem, std::span<const double>(x_bar.data(), x_bar.size()));
  out.w = state.w;
  return out;
}

bool keep_audit_record(std::size_t k) noexcept { return k <= 10000 || k % 10 == 0; }

RunTrace run(const AllocationProblem& problem, const CommGraph& graph,
             const ScheduleSet& schedules, const RunOptions& options) {
  return run(problem, graph, schedules, options, make_reference(problem, graph));
}

RunTrace run(const AllocationProblem& problem, const CommGraph& graph,
             const ScheduleSet& schedules, const RunOptions& options, const RunReference& ref) {
  if (options.n_iters == 0) throw std::invalid_argument("n_iters must be at least 1");
  schedules.validate();
  if (options.algorithm == Algorithm::kDdgt) options.baseline.validate();

  RunTrace trace;
  trace.algorithm = options.algorithm;
  trace.seed = options.seed;
  trace.n_iters = options.n_iters;
  trace.reference = ref;

  const NoiseSource noise(options.seed);
  SolverState state = options.algorithm == Algorithm::kDpdgt
                          ? initial_state(problem, options.s0, options.tilde_w0)
                          : baseline_initial_state(problem, options.baseline.iota,
                                                   options.tilde_w0);
  trace.initial = compute_metrics(state, problem, ref);
  if (options.keep_metrics) trace.metrics.reserve(options.n_iters);

  for (std::size_t it = 0; it < options.n_iters; ++it) {
    StepOutput step =
        options.algorithm == Algorithm::kDpdgt
            ? dpdgt_step(state, problem, graph, schedules, noise)
            : ddgt_baseline_step(state, problem, graph, schedules, options.baseline, noise);
    if (options.keep_metrics) trace.metrics.push_back(compute_metrics(step.next, problem, ref));
    if (options.audit && keep_audit_record(state.k)) {
      trace.audit.push_back(AuditRecord{state.k, step.next, std::move(step.xi),
                                        std::move(step.zeta), std::move(step.obs_s),
                                        std::move(step.obs_w)});
    }
    state = std::move(step.next);
  }
  trace.terminal = options.keep_metrics ? trace.metrics.back() : compute_metrics(state, problem, ref);
  trace.final_state = std::move(state);
  return trace;
}

CoupledRun coupled_adjacent_run(const AllocationProblem& problem,
                                const AdjacencyPerturbation& perturbation,
                                const CommGraph& graph, const ScheduleSet& schedules,
                                std::size_t n_iters, std::uint64_t seed) {
  schedules.validate();
  CoupledRun out{make_adjacent(problem, perturbation), {}, {}, true, std::nullopt, {}, {}};
  const AllocationProblem& twin_problem = out.adjacent.problem;
  const auto i0 = static_cast<Eigen::Index>(perturbation.target_agent);

  const NoiseSource noise(seed);
  SolverState original = initial_state(problem);
  // Identical starting point, including the allocation.
  SolverState twin = original;

  auto record = [&](const SolverState& a, const SolverState& b) {
    out.ds_l1.push_back((a.s.row(i0) - b.s.row(i0)).lpNorm<1>());
    out.dw_l1.push_back((a.tilde_w.row(i0) - b.tilde_w.row(i0)).lpNorm<1>());
    for (Eigen::Index i = 0; i < a.s.rows(); ++i) {
      if (i == i0) continue;
      const bool same = a.s.row(i) == b.s.row(i) && a.tilde_w.row(i) == b.tilde_w.row(i) &&
                        a.w.row(i) == b.w.row(i);
      if (!same) {
        out.others_identical = false;
        if (!out.first_mismatch) out.first_mismatch = a.k;
      }
    }
  };

  out.ds_l1.reserve(n_iters + 1);
  out.dw_l1.reserve(n_iters + 1);
  record(original, twin);
  for (std::size_t it = 0; it < n_iters; ++it) {
    StepOutput step = dpdgt_step(original, problem, graph, schedules, noise);
    StepOutput twin_step =
        dpdgt_update(twin, twin_problem, graph, schedules, step.obs_s, step.obs_w);
    original = std::move(step.next);
    twin = std::move(twin_step.next);
    record(original, twin);
  }
  out.original_final = std::move(original);
  out.adjacent_final = std::move(twin);
  return out;
}

}  // namespace dpdgt
