#include "dpdgt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpdgt/errors.hpp"
#include "dpdgt/presets.hpp"
#include "json.hpp"
#include "json_text.hpp"

namespace dpdgt {

using detail::format_double;
using nlohmann::json;

namespace {

AllocationProblem build_problem(const ProblemSpec& spec) {
  if (spec.agents.empty()) return presets::problem_by_name(spec.preset);
  std::vector<Agent> agents;
  agents.reserve(spec.agents.size());
  for (const auto& a : spec.agents) {
    agents.push_back(
        {std::make_shared<const QuadraticBoxCost>(a.a, a.b, a.c, a.lo, a.hi), a.demand});
  }
  return AllocationProblem(std::move(agents), spec.dim);
}

CommGraph build_graph(const GraphSpec& spec) {
  if (!spec.preset.empty()) return presets::graph_by_name(spec.preset);
  auto zero_based = [](const EdgeList& l) {
    EdgeList out;
    out.reserve(l.size());
    for (const auto& [a, b] : l) out.emplace_back(a - 1, b - 1);
    return out;
  };
  return build_uniform_weights(spec.n_agents, zero_based(spec.edges_r), zero_based(spec.edges_c));
}

json number_array(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  }
  return out;
}

json report_json(const PrivacyReport& r) {
  json j{{"method", to_string(r.method)},
         {"D_eta", r.d_eta.value},
         {"D_alpha_xi", r.d_alpha_xi},
         {"D_alpha_zeta", r.d_alpha_zeta},
         {"epsilon", r.epsilon},
         {"finite", r.finite()},
         {"failures", r.failures}};
  if (r.method == EtaMode::kNumeric) {
    j["D_eta_horizon"] = r.d_eta.horizon;
    j["D_eta_certified"] = r.d_eta.certified;
    j["D_eta_tail_bound"] = r.d_eta.tail_bound;
  }
  return j;
}

json privacy_json(const PrivacySummary& p, const ScheduleSet& s, double delta) {
  const ConditionVerdict& v = p.verdict;
  json verdicts{{"alpha_summable", v.alpha_summable},
                {"theta_xi_sq_summable", v.theta_xi_sq_summable},
                {"theta_zeta_sq_summable", v.theta_zeta_sq_summable},
                {"theta_xi_sq_over_alpha_summable", v.theta_xi_sq_over_alpha_summable},
                {"theta_zeta_sq_over_alpha_summable", v.theta_zeta_sq_over_alpha_summable},
                {"alpha_over_theta_xi_summable", v.alpha_over_theta_xi_summable},
                {"alpha_over_theta_zeta_summable", v.alpha_over_theta_zeta_summable},
                {"lambda_exists", v.lambda_exists},
                {"ratio_ordering", v.ratio_ordering},
                {"step_below_contraction", v.step_below_contraction},
                {"convergence", v.convergence()},
                {"privacy", v.privacy()},
                {"closed_form", v.closed_form()},
                {"failures", v.failures()}};
  json sums{{"sum_alpha", v.sum_alpha},
            {"sum_theta_xi_sq", v.sum_theta_xi_sq},
            {"sum_theta_zeta_sq", v.sum_theta_zeta_sq},
            {"sum_theta_xi_sq_over_alpha", v.sum_theta_xi_sq_over_alpha},
            {"sum_theta_zeta_sq_over_alpha", v.sum_theta_zeta_sq_over_alpha},
            {"sum_alpha_over_theta_xi", v.sum_alpha_over_theta_xi},
            {"sum_alpha_over_theta_zeta", v.sum_alpha_over_theta_zeta}};
  json inputs{{"alpha0", s.alpha.initial},
              {"q", s.alpha.ratio},
              {"theta_xi0", s.theta_xi.initial},
              {"q_xi", s.theta_xi.ratio},
              {"theta_zeta0", s.theta_zeta.initial},
              {"q_zeta", s.theta_zeta.ratio},
              {"gamma", s.gamma},
              {"phi", s.phi},
              {"mu", v.mu},
              {"delta", delta}};
  json spectral{{"rho_R", p.spectral.rho_r},
                {"rho_C", p.spectral.rho_c},
                {"rho_R_method", p.spectral.rho_r_method},
                {"rho_C_method", p.spectral.rho_c_method},
                {"q_c_estimate", p.spectral.q_c_estimate}};
  json closed = p.closed_form ? json(*p.closed_form) : json(nullptr);
  return json{{"inputs", inputs},
              {"spectral", spectral},
              {"sums", sums},
              {"verdicts", verdicts},
              {"theorem_numeric", report_json(p.numeric)},
              {"theorem_closed_form_eta", report_json(p.closed_form_path)},
              {"closed_form_epsilon", closed},
              {"closed_form_error", p.closed_form_error}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::filesystem::path prepare(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  return out_dir;
}

std::string echo_line(const RunConfig& config) { return serialize_config(config, false); }

}  // namespace

Scenario build_scenario(const RunConfig& config) {
  Scenario s{build_problem(config.problem), build_graph(config.graph), config.schedules.values,
             config.schedules.baseline};
  if (s.graph.n_agents() != s.problem.n_agents()) {
    throw std::invalid_argument("graph: " + std::to_string(s.graph.n_agents()) +
                                " agents but problem has " +
                                std::to_string(s.problem.n_agents()));
  }
  if (!s.problem.slater_feasible()) {
    throw InfeasibleProblem(
        "problem: total demand lies outside the range the boxes allow (Slater condition fails)");
  }
  const auto n = static_cast<Eigen::Index>(s.problem.n_agents());
  const auto m = static_cast<Eigen::Index>(s.problem.dim());
  for (const auto& [name, init] : {std::pair{"run.s0", &config.run.s0},
                                   std::pair{"run.tilde_w0", &config.run.tilde_w0}}) {
    if (*init && ((*init)->rows() != n || (*init)->cols() != m)) {
      throw std::invalid_argument(std::string(name) + ": expected " + std::to_string(n) +
                                  " rows of " + std::to_string(m) + " values");
    }
  }
  s.schedules.validate();
  return s;
}

RunOptions run_options(const RunConfig& config) {
  RunOptions o;
  o.algorithm = config.run.algorithm;
  o.n_iters = config.run.n_iters;
  o.seed = config.schedules.seed;
  o.audit = config.run.audit;
  o.s0 = config.run.s0;
  o.tilde_w0 = config.run.tilde_w0;
  o.baseline = config.schedules.baseline;
  return o;
}

void write_metrics_csv(std::ostream& out, const RunTrace& trace, const AllocationProblem& problem,
                       const std::string& config_echo) {
  out << "# config: " << config_echo << '\n';
  out << "# algorithm: " << to_string(trace.algorithm) << ", seed: " << trace.seed << '\n';
  std::vector<std::size_t> movers;
  for (std::size_t i = 0; i < problem.n_agents(); ++i) {
    if (!problem.cost(i).degenerate()) movers.push_back(i);
  }
  const std::size_t m = problem.dim();
  out << "iter,err_sq,supply,demand,consensus,dual_value";
  for (std::size_t i : movers) {
    for (std::size_t j = 0; j < m; ++j) {
      out << ",w" << i + 1;
      if (m > 1) out << '_' << j + 1;
    }
  }
  out << '\n';
  for (const auto& row : trace.metrics) {
    out << row.iter << ',' << format_double(row.err_sq) << ',' << format_double(row.supply) << ','
        << format_double(row.demand) << ',' << format_double(row.consensus) << ','
        << format_double(row.dual_value);
    for (std::size_t i : movers) {
      for (std::size_t j = 0; j < m; ++j) {
        out << ',' << format_double(row.w(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)));
      }
    }
    out << '\n';
  }
}

void write_audit_csv(std::ostream& out, const RunTrace& trace) {
  out << "k,agent,coord,xi,zeta,obs_s,obs_w\n";
  for (const auto& rec : trace.audit) {
    for (Eigen::Index i = 0; i < rec.xi.rows(); ++i) {
      for (Eigen::Index j = 0; j < rec.xi.cols(); ++j) {
        out << rec.k << ',' << i + 1 << ',' << j + 1 << ',' << format_double(rec.xi(i, j)) << ','
            << format_double(rec.zeta(i, j)) << ',' << format_double(rec.obs_s(i, j)) << ','
            << format_double(rec.obs_w(i, j)) << '\n';
      }
    }
  }
}

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::uint64_t replica_seed(std::uint64_t root, std::size_t replica) {
  return derive_seed(root, replica);
}

SampleStats sample_stats(const std::vector<double>& xs) {
  SampleStats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.standard_error = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

SampleStats SweepResult::step_difference(std::size_t i) const {
  const auto& lo = points.at(i).terminal_err_sq;
  const auto& hi = points.at(i + 1).terminal_err_sq;
  std::vector<double> d(lo.size());
  for (std::size_t r = 0; r < lo.size(); ++r) d[r] = hi[r] - lo[r];
  return sample_stats(d);
}

ScheduleSet with_parameter(const ScheduleSet& s, const std::string& parameter, double value) {
  ScheduleSet out = s;
  if (parameter == "theta0") {
    out.theta_xi.initial = value;
    out.theta_zeta.initial = value;
  } else if (parameter == "alpha0") {
    out.alpha.initial = value;
  } else if (parameter == "q") {
    out.alpha.ratio = value;
  } else {
    throw std::invalid_argument("sweep parameter must be theta0, alpha0 or q, got '" +
                                parameter + "'");
  }
  out.validate();
  return out;
}

SweepResult run_sweep(const RunConfig& config, const Scenario& scenario) {
  const RunSpec& spec = config.run;
  if (spec.sweep.grid.empty()) throw std::invalid_argument("run.sweep.grid: must not be empty");
  SweepResult out;
  out.parameter = spec.sweep.parameter;
  out.grid = spec.sweep.grid;
  out.n_iters = spec.n_iters;
  out.mu = scenario.problem.mu();
  out.delta = spec.delta;
  for (std::size_t r = 0; r < spec.n_seeds; ++r) {
    out.seeds.push_back(replica_seed(config.schedules.seed, r));
  }

  std::vector<ScheduleSet> schedules;
  for (double v : out.grid) {
    schedules.push_back(with_parameter(scenario.schedules, out.parameter, v));
  }
  const RunReference ref = make_reference(scenario.problem, scenario.graph);
  RunOptions base = run_options(config);
  base.audit = false;
  base.keep_metrics = false;

  const std::size_t n_points = out.grid.size();
  std::vector<double> terminal(n_points * spec.n_seeds);
  parallel_for(terminal.size(), spec.threads, [&](std::size_t job) {
    const std::size_t p = job / spec.n_seeds;
    const std::size_t r = job % spec.n_seeds;
    RunOptions o = base;
    o.seed = out.seeds[r];
    terminal[job] = run(scenario.problem, scenario.graph, schedules[p], o, ref).terminal.err_sq;
  });

  for (std::size_t p = 0; p < n_points; ++p) {
    SweepPoint pt;
    pt.value = out.grid[p];
    pt.terminal_err_sq.assign(terminal.begin() + static_cast<std::ptrdiff_t>(p * spec.n_seeds),
                              terminal.begin() + static_cast<std::ptrdiff_t>((p + 1) * spec.n_seeds));
    pt.err_sq = sample_stats(pt.terminal_err_sq);
    pt.inverse_theta0 = out.parameter == "theta0"
                            ? (pt.value > 0.0 ? 1.0 / pt.value : kDivergent)
                            : std::numeric_limits<double>::quiet_NaN();
    try {
      pt.epsilon =
          closed_form_epsilon(ClosedFormInputs::from(schedules[p], out.mu, out.delta));
    } catch (const std::exception&) {
      pt.epsilon = kDivergent;
    }
    out.points.push_back(std::move(pt));
  }
  return out;
}

bool CompareResult::dpdgt_better() const {
  return difference.mean > kZ95 * difference.standard_error && difference.mean > 0.0;
}

CompareResult run_compare(const RunConfig& config, const Scenario& scenario) {
  const RunSpec& spec = config.run;
  CompareResult out;
  out.n_iters = spec.n_iters;
  for (std::size_t r = 0; r < spec.n_seeds; ++r) {
    out.seeds.push_back(replica_seed(config.schedules.seed, r));
  }
  const RunReference ref = make_reference(scenario.problem, scenario.graph);
  RunOptions base = run_options(config);
  base.audit = false;

  const std::size_t n = spec.n_seeds;
  std::vector<std::vector<double>> curves(2 * n);
  out.dpdgt_terminal.resize(n);
  out.ddgt_terminal.resize(n);
  parallel_for(2 * n, spec.threads, [&](std::size_t job) {
    const std::size_t r = job / 2;
    RunOptions o = base;
    o.seed = out.seeds[r];
    o.algorithm = job % 2 == 0 ? Algorithm::kDpdgt : Algorithm::kDdgt;
    const RunTrace t = run(scenario.problem, scenario.graph, scenario.schedules, o, ref);
    std::vector<double> curve;
    curve.reserve(t.metrics.size());
    for (const auto& row : t.metrics) curve.push_back(row.err_sq);
    (job % 2 == 0 ? out.dpdgt_terminal : out.ddgt_terminal)[r] = t.terminal.err_sq;
    curves[job] = std::move(curve);
  });

  out.dpdgt_curve.assign(spec.n_iters, 0.0);
  out.ddgt_curve.assign(spec.n_iters, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < spec.n_iters; ++k) {
      out.dpdgt_curve[k] += curves[2 * r][k] / static_cast<double>(n);
      out.ddgt_curve[k] += curves[2 * r + 1][k] / static_cast<double>(n);
    }
  }
  std::vector<double> diff(n);
  for (std::size_t r = 0; r < n; ++r) diff[r] = out.ddgt_terminal[r] - out.dpdgt_terminal[r];
  out.dpdgt = sample_stats(out.dpdgt_terminal);
  out.ddgt = sample_stats(out.ddgt_terminal);
  out.difference = sample_stats(diff);
  return out;
}

PrivacySummary privacy_summary(const Scenario& scenario, double delta) {
  PrivacySummary p;
  const ScheduleSet& s = scenario.schedules;
  const double mu = scenario.problem.mu();
  p.spectral = spectral_analysis(scenario.graph, s.gamma, s.phi);
  p.verdict = check_conditions(s, mu, p.spectral.q_c_estimate);
  p.numeric = cumulative_epsilon(s, mu, delta, EtaMode::kNumeric);
  p.closed_form_path = cumulative_epsilon(s, mu, delta, EtaMode::kClosedForm);
  try {
    p.closed_form = closed_form_epsilon(ClosedFormInputs::from(s, mu, delta));
  } catch (const std::exception& e) {
    p.closed_form_error = e.what();
  }
  return p;
}

std::string cli_run(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Scenario sc = build_scenario(config);
  RunTrace trace = run(sc.problem, sc.graph, sc.schedules, run_options(config));
  trace.config_echo = echo_line(config);
  const auto dir = prepare(out_dir);

  std::ostringstream csv;
  write_metrics_csv(csv, trace, sc.problem, trace.config_echo);
  write_text(dir / "metrics.csv", csv.str());
  if (config.run.audit) {
    std::ostringstream audit;
    write_audit_csv(audit, trace);
    write_text(dir / "audit.csv", audit.str());
  }

  const IterationMetrics& t = trace.terminal;
  const double w_star_norm = trace.reference.w_star.norm();
  json summary{{"algorithm", to_string(trace.algorithm)},
               {"seed", trace.seed},
               {"n_iters", trace.n_iters},
               {"terminal",
                {{"err_sq", t.err_sq},
                 {"relative_error", w_star_norm > 0 ? std::sqrt(t.err_sq) / w_star_norm : 0.0},
                 {"supply", t.supply},
                 {"demand", t.demand},
                 {"supply_demand_gap", t.supply - t.demand},
                 {"consensus", t.consensus},
                 {"dual_value", t.dual_value}}},
               {"allocation", number_array(trace.final_state.w)},
               {"optimum", number_array(trace.reference.w_star)},
               {"config", json::parse(trace.config_echo)}};
  const PrivacySummary p = privacy_summary(sc, config.run.delta);
  if (p.numeric.finite()) {
    summary["privacy"] = {{"delta", config.run.delta},
                          {"epsilon_numeric", p.numeric.epsilon},
                          {"epsilon_closed_form", p.closed_form ? json(*p.closed_form) : json()}};
  }
  write_text(dir / "summary.json", detail::dump_json(summary) + "\n");

  std::ostringstream msg;
  msg << "run: " << trace.n_iters << " iterations, terminal err_sq " << format_double(t.err_sq)
      << ", supply " << format_double(t.supply) << " / demand " << format_double(t.demand)
      << " -> " << (dir / "metrics.csv").string();
  return msg.str();
}

std::string cli_sweep(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Scenario sc = build_scenario(config);
  const SweepResult res = run_sweep(config, sc);
  const auto dir = prepare(out_dir);

  std::ostringstream csv;
  csv << "# config: " << echo_line(config) << '\n';
  csv << res.parameter << ",mean_err_sq,se_err_sq,n,inverse_theta0,epsilon,step_diff,step_diff_se\n";
  json points = json::array();
  for (std::size_t p = 0; p < res.points.size(); ++p) {
    const SweepPoint& pt = res.points[p];
    SampleStats step;
    if (p > 0) step = res.step_difference(p - 1);
    csv << format_double(pt.value) << ',' << format_double(pt.err_sq.mean) << ','
        << format_double(pt.err_sq.standard_error) << ',' << pt.err_sq.n << ','
        << format_double(pt.inverse_theta0) << ',' << format_double(pt.epsilon) << ','
        << format_double(step.mean) << ',' << format_double(step.standard_error) << '\n';
    points.push_back({{"value", pt.value},
                      {"mean_err_sq", pt.err_sq.mean},
                      {"se_err_sq", pt.err_sq.standard_error},
                      {"n", pt.err_sq.n},
                      {"inverse_theta0", pt.inverse_theta0},
                      {"epsilon", pt.epsilon}});
  }
  write_text(dir / "sweep.csv", csv.str());
  json summary{{"parameter", res.parameter},
               {"n_iters", res.n_iters},
               {"n_seeds", res.seeds.size()},
               {"root_seed", config.schedules.seed},
               {"points", points}};
  write_text(dir / "sweep.json", detail::dump_json(summary) + "\n");

  std::ostringstream msg;
  msg << "sweep over " << res.parameter << ": " << res.points.size() << " points x "
      << res.seeds.size() << " seeds -> " << (dir / "sweep.csv").string();
  return msg.str();
}

std::string cli_compare(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Scenario sc = build_scenario(config);
  const CompareResult res = run_compare(config, sc);
  const auto dir = prepare(out_dir);

  std::ostringstream csv;
  csv << "# config: " << echo_line(config) << '\n';
  csv << "iter,dpdgt_mean_err_sq,ddgt_mean_err_sq\n";
  for (std::size_t k = 0; k < res.n_iters; ++k) {
    csv << k + 1 << ',' << format_double(res.dpdgt_curve[k]) << ','
        << format_double(res.ddgt_curve[k]) << '\n';
  }
  write_text(dir / "compare.csv", csv.str());
  json summary{{"n_iters", res.n_iters},
               {"n_seeds", res.seeds.size()},
               {"dpdgt", {{"mean_err_sq", res.dpdgt.mean}, {"se", res.dpdgt.standard_error}}},
               {"ddgt", {{"mean_err_sq", res.ddgt.mean}, {"se", res.ddgt.standard_error}}},
               {"paired_difference",
                {{"mean", res.difference.mean}, {"se", res.difference.standard_error}}},
               {"dpdgt_better_at_95", res.dpdgt_better()}};
  write_text(dir / "compare.json", detail::dump_json(summary) + "\n");

  std::ostringstream msg;
  msg << "compare: dpdgt " << format_double(res.dpdgt.mean) << " vs ddgt "
      << format_double(res.ddgt.mean) << " mean terminal err_sq -> "
      << (dir / "compare.csv").string();
  return msg.str();
}

std::string cli_privacy(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Scenario sc = build_scenario(config);
  const PrivacySummary p = privacy_summary(sc, config.run.delta);
  const auto dir = prepare(out_dir);
  write_text(dir / "privacy.json",
             detail::dump_json(privacy_json(p, sc.schedules, config.run.delta)) + "\n");
  std::ostringstream msg;
  msg << "privacy: epsilon " << (p.numeric.finite() ? format_double(p.numeric.epsilon) : "inf")
      << " (numeric D_eta), "
      << (p.closed_form ? format_double(*p.closed_form) : std::string("n/a"))
      << " (closed form) -> " << (dir / "privacy.json").string();
  return msg.str();
}

std::string cli_solve(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Scenario sc = build_scenario(config);
  const CentralizedSolution sol = centralized_solve(sc.problem);
  const auto dir = prepare(out_dir);
  json out{{"allocation", number_array(sol.w)},
           {"multiplier", number_array(sol.multiplier)},
           {"total", sol.w.sum()},
           {"demand", sc.problem.demand().sum()},
           {"cost", sc.problem.primal_cost(sol.w)},
           {"bisection_steps", sol.bisection_steps}};
  write_text(dir / "solve.json", detail::dump_json(out) + "\n");
  std::ostringstream msg;
  msg << "solve: total " << format_double(sol.w.sum()) << " -> " << (dir / "solve.json").string();
  return msg.str();
}

}  // namespace dpdgt
