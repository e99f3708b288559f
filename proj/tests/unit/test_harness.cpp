#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "dpdgt/config.hpp"
#include "dpdgt/errors.hpp"
#include "dpdgt/harness.hpp"
#include "dpdgt/presets.hpp"

using namespace dpdgt;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dpdgt_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  RunConfig c;
  const std::size_t n = 2 + static_cast<std::size_t>(u(rng) * 5);
  if (coin(rng)) {
    c.problem.preset.clear();
    c.problem.dim = 1 + static_cast<std::size_t>(coin(rng));
    for (std::size_t i = 0; i < n; ++i) {
      AgentSpec a{0.01 + u(rng), u(rng) * 10 - 5, u(rng), -u(rng) * 10, u(rng) * 10, {}};
      for (std::size_t j = 0; j < c.problem.dim; ++j) a.demand.push_back(u(rng) * 3);
      c.problem.agents.push_back(a);
    }
  }
  if (coin(rng)) {
    c.graph.preset.clear();
    c.graph.n_agents = n;
    for (std::size_t i = 1; i <= n; ++i) {
      c.graph.edges_r.emplace_back(i, i % n + 1);
      if (coin(rng)) c.graph.edges_c.emplace_back(i % n + 1, i);
    }
  }
  if (coin(rng)) c.schedules.preset = coin(rng) ? "ieee14-convergence" : "ieee14-comparison";
  c.schedules.values.alpha = {u(rng) * 0.1, 0.01 + 0.98 * u(rng)};
  c.schedules.values.theta_xi = {u(rng) / 3.0, 0.01 + 0.98 * u(rng)};
  c.schedules.values.theta_zeta = {u(rng) * 7.0, 0.01 + 0.98 * u(rng)};
  c.schedules.values.gamma = 0.01 + 0.99 * u(rng);
  c.schedules.values.phi = 0.01 + 0.99 * u(rng);
  c.schedules.seed = rng();
  c.schedules.baseline.beta = {u(rng) + 0.1, 0.5 + 0.4 * u(rng)};
  c.schedules.baseline.iota = u(rng) / 7.0;
  c.run.algorithm = coin(rng) ? Algorithm::kDpdgt : Algorithm::kDdgt;
  c.run.n_iters = 1 + rng() % 100000;
  c.run.n_seeds = 1 + rng() % 3000;
  c.run.delta = u(rng) * 3;
  c.run.audit = coin(rng);
  c.run.out = "dir_" + std::to_string(rng() % 1000);
  c.run.threads = rng() % 8;
  c.run.sweep.parameter = coin(rng) ? "theta0" : "q";
  c.run.sweep.grid = {u(rng), u(rng) / 3, 1.0 / 7.0};
  if (coin(rng)) {
    Matrix m(static_cast<Eigen::Index>(n), 2);
    m.setRandom();
    c.run.tilde_w0 = m;
  }
  return c;
}

RunConfig small_config(std::size_t iters) {
  RunConfig c;
  c.schedules.values = presets::ieee14_convergence_schedules();
  c.schedules.seed = 12;
  c.run.n_iters = iters;
  c.run.threads = 2;
  return c;
}

}  // namespace

TEST_CASE("config round trip") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const RunConfig c = random_config(rng);
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
    CHECK(parse_config(serialize_config(c, false)) == c);
  }
}

TEST_CASE("config defaults and presets") {
  const RunConfig c = parse_config(R"({"problem": {"preset": "ieee14"}, "graph": {"preset": "ieee14"},
      "schedules": {"preset": "ieee14-comparison", "seed": 5}, "run": {"n_iters": 10}})");
  CHECK(c.schedules.values == presets::ieee14_comparison_schedules());
  CHECK(c.schedules.seed == 5);
  CHECK(c.run.n_iters == 10);
  const RunConfig over = parse_config(R"({"schedules": {"preset": "ieee14-comparison", "q": 0.98}})");
  CHECK(over.schedules.values.alpha.ratio == 0.98);
  CHECK(over.schedules.values.alpha.initial == 0.034);
}

TEST_CASE("config errors name the field") {
  auto message = [](const char* text) {
    try {
      parse_config(text);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"run": {"n_iters": 0}})").find("run.n_iters") != std::string::npos);
  CHECK(message(R"({"schedules": {"q": 1.5}})").find("schedules.q") != std::string::npos);
  CHECK(message(R"({"schedules": {"gamma": 0}})").find("schedules.gamma") != std::string::npos);
  CHECK(message(R"({"schedules": {"bogus": 1}})").find("schedules.bogus") != std::string::npos);
  CHECK(message(R"({"problem": {"preset": "nope"}})").find("nope") != std::string::npos);
  CHECK(message(R"({"graph": {"n_agents": 2, "edges_R": [[1, 3]]}})").find("graph.edges_R") !=
        std::string::npos);
  CHECK(message(R"({"problem": {"agents": [{"a": -1}]}})").find("problem.agents[0].a") !=
        std::string::npos);
  CHECK(message(R"({"run": {"algorithm": "sgd"}})").find("run.algorithm") != std::string::npos);
  CHECK(message("{not json").find("config") != std::string::npos);
}

TEST_CASE("scenario checks") {
  RunConfig c;
  c.graph.preset.clear();
  c.graph.n_agents = 3;
  CHECK_THROWS_AS(build_scenario(c), std::invalid_argument);
  RunConfig d;
  d.problem.preset.clear();
  d.problem.agents = {{1.0, 0.0, 0.0, 0.0, 1.0, {5.0}}, {1.0, 0.0, 0.0, 0.0, 1.0, {0.0}}};
  d.graph.preset.clear();
  d.graph.n_agents = 2;
  CHECK_THROWS_AS(build_scenario(d), InfeasibleProblem);
}

TEST_CASE("run output") {
  const RunConfig c = small_config(3000);
  const auto dir = scratch("run");
  cli_run(c, dir / "a");
  cli_run(c, dir / "b");
  const std::string csv = slurp(dir / "a" / "metrics.csv");
  CHECK(csv == slurp(dir / "b" / "metrics.csv"));

  std::istringstream in(csv);
  std::string line;
  std::size_t comments = 0, rows = 0;
  std::string header;
  long last_iter = 0;
  bool monotone = true;
  double last_supply = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      ++comments;
      continue;
    }
    if (header.empty()) {
      header = line;
      continue;
    }
    ++rows;
    const long iter = std::stol(line.substr(0, line.find(',')));
    monotone = monotone && iter == last_iter + 1;
    last_iter = iter;
    std::istringstream fields(line);
    std::string f;
    for (int i = 0; i < 3; ++i) std::getline(fields, f, ',');
    last_supply = std::stod(f);
  }
  CHECK(comments >= 1);
  CHECK(header == "iter,err_sq,supply,demand,consensus,dual_value,w1,w2,w3,w6,w8");
  CHECK(rows == 3000);
  CHECK(monotone);
  CHECK(std::abs(last_supply - 361.0) < 5.0);
  CHECK(std::filesystem::exists(dir / "a" / "summary.json"));

  // The echoed config replays the run.
  const std::string first = csv.substr(0, csv.find('\n'));
  const RunConfig echoed = parse_config(first.substr(std::string("# config: ").size()));
  CHECK(echoed == c);
}

TEST_CASE("audit output") {
  RunConfig c = small_config(20);
  c.run.audit = true;
  const auto dir = scratch("audit");
  cli_run(c, dir);
  const std::string audit = slurp(dir / "audit.csv");
  CHECK(std::count(audit.begin(), audit.end(), '\n') == 1 + 20 * 14);
}

TEST_CASE("sweep") {
  SUBCASE("noiseless point has no spread") {
    RunConfig c = small_config(500);
    c.run.n_seeds = 5;
    c.run.sweep.grid = {0.0};
    const SweepResult r = run_sweep(c, build_scenario(c));
    REQUIRE(r.points.size() == 1);
    for (double e : r.points[0].terminal_err_sq) CHECK(e == r.points[0].terminal_err_sq[0]);
    CHECK(r.points[0].err_sq.standard_error == 0.0);
  }
  SUBCASE("trend column and reproducibility") {
    RunConfig c = small_config(300);
    c.run.n_seeds = 6;
    c.run.sweep.grid = {0.02, 0.05, 0.1};
    const Scenario sc = build_scenario(c);
    const SweepResult a = run_sweep(c, sc);
    c.run.threads = 1;
    const SweepResult b = run_sweep(c, sc);
    for (std::size_t p = 0; p < 3; ++p) {
      CHECK(a.points[p].inverse_theta0 == doctest::Approx(1.0 / c.run.sweep.grid[p]));
      CHECK(a.points[p].terminal_err_sq == b.points[p].terminal_err_sq);
      CHECK(std::isfinite(a.points[p].epsilon));
    }
    CHECK(a.points[0].epsilon > a.points[2].epsilon);
  }
  SUBCASE("files") {
    RunConfig c = small_config(100);
    c.run.n_seeds = 2;
    const auto dir = scratch("sweep");
    cli_sweep(c, dir);
    CHECK(std::filesystem::exists(dir / "sweep.csv"));
    CHECK(std::filesystem::exists(dir / "sweep.json"));
  }
}

TEST_CASE("compare") {
  SUBCASE("noiseless runs settle and the step budget sets the gap") {
    // A geometric step leaves the dual short of its optimum by an amount
    // that shrinks as the step ratio approaches one.
    double previous = 0.0;
    for (double q : {0.99, 0.995, 0.999}) {
      RunConfig c = small_config(3000);
      c.schedules.values = presets::ieee14_comparison_schedules();
      c.schedules.values.alpha.ratio = q;
      c.schedules.values.theta_xi.initial = 0.0;
      c.schedules.values.theta_zeta.initial = 0.0;
      c.run.n_seeds = 1;
      const CompareResult r = run_compare(c, build_scenario(c));
      CHECK(r.ddgt.mean <= 1e-9);
      CHECK(r.dpdgt.mean <= 1.0);
      if (previous > 0.0) CHECK(r.dpdgt.mean < 0.5 * previous);
      previous = r.dpdgt.mean;
    }
  }
  SUBCASE("files") {
    RunConfig c = small_config(50);
    c.run.n_seeds = 2;
    const auto dir = scratch("compare");
    cli_compare(c, dir);
    const std::string csv = slurp(dir / "compare.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 50);
  }
}

TEST_CASE("privacy report") {
  SUBCASE("convergence preset") {
    RunConfig c;
    c.schedules.values = presets::ieee14_convergence_schedules();
    const PrivacySummary p = privacy_summary(build_scenario(c), 1.0);
    CHECK(p.verdict.closed_form());
    CHECK(p.numeric.finite());
    REQUIRE(p.closed_form.has_value());
    CHECK(std::isfinite(*p.closed_form));
  }
  SUBCASE("divergent tail reported, not thrown") {
    RunConfig c;
    c.schedules.values.alpha.ratio = c.schedules.values.theta_xi.ratio;
    const PrivacySummary p = privacy_summary(build_scenario(c), 1.0);
    CHECK_FALSE(p.numeric.finite());
    CHECK_FALSE(p.closed_form.has_value());
    const auto dir = scratch("privacy");
    CHECK_NOTHROW(cli_privacy(c, dir));
    CHECK(slurp(dir / "privacy.json").find("\"epsilon\": null") != std::string::npos);
  }
  SUBCASE("no perturbation") {
    RunConfig c;
    const PrivacySummary p = privacy_summary(build_scenario(c), 0.0);
    CHECK(p.numeric.epsilon == 0.0);
    CHECK(*p.closed_form == 0.0);
  }
}

TEST_CASE("solve output") {
  const auto dir = scratch("solve");
  cli_solve(RunConfig{}, dir);
  CHECK(slurp(dir / "solve.json").find("76.7397") != std::string::npos);
}

TEST_CASE("sample statistics") {
  const SampleStats s = sample_stats({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
}
