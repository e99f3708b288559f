#include "dpdgt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dpdgt/presets.hpp"
#include "json.hpp"
#include "json_text.hpp"

namespace dpdgt {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument(field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> known) {
  if (!obj.is_object()) fail(where, "expected an object");
  const std::set<std::string> names(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!names.contains(it.key())) fail(where + "." + it.key(), "unknown key");
  }
}

double get_double(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_uint(const json& obj, const char* key, const std::string& where,
                       std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) fail(where + "." + key, "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(where + "." + key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) fail(where, "expected a number or a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(where, "expected numbers only");
    out.push_back(x.get<double>());
  }
  return out;
}

EdgeList edge_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected a list of [i, j] pairs");
  EdgeList out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() ||
        !e[1].is_number_unsigned()) {
      fail(where, "expected a list of [i, j] pairs of positive integers");
    }
    out.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
  }
  return out;
}

Matrix matrix_from(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a nonempty list of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::Index m = -1;
  Matrix out;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::vector<double> row = number_list(v[static_cast<std::size_t>(i)], where);
    if (m < 0) {
      m = static_cast<Eigen::Index>(row.size());
      out.resize(n, m);
    }
    if (static_cast<Eigen::Index>(row.size()) != m) fail(where, "rows differ in length");
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

json matrix_to(const Matrix& mat) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(mat(i, j));
    rows.push_back(row);
  }
  return rows;
}

ProblemSpec parse_problem(const json& j) {
  const std::string where = "problem";
  reject_unknown(j, where, {"preset", "dim", "agents"});
  ProblemSpec p;
  p.preset = get_string(j, "preset", where, j.contains("agents") ? "" : p.preset);
  p.dim = get_uint(j, "dim", where, 1);
  if (p.dim == 0) fail(where + ".dim", "must be at least 1");
  if (j.contains("agents")) {
    if (!p.preset.empty()) fail(where, "give either preset or agents, not both");
    const json& list = j.at("agents");
    if (!list.is_array() || list.empty()) fail(where + ".agents", "expected a nonempty list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = where + ".agents[" + std::to_string(i) + "]";
      reject_unknown(list[i], at, {"a", "b", "c", "lo", "hi", "demand"});
      AgentSpec a;
      if (!list[i].contains("a")) fail(at + ".a", "missing");
      a.a = get_double(list[i], "a", at, a.a);
      a.b = get_double(list[i], "b", at, a.b);
      a.c = get_double(list[i], "c", at, a.c);
      a.lo = get_double(list[i], "lo", at, a.lo);
      a.hi = get_double(list[i], "hi", at, a.hi);
      a.demand = list[i].contains("demand") ? number_list(list[i].at("demand"), at + ".demand")
                                            : std::vector<double>(p.dim, 0.0);
      if (!(a.a > 0.0)) fail(at + ".a", "must be positive");
      if (!(a.lo <= a.hi)) fail(at + ".lo", "must not exceed hi");
      if (a.demand.size() != p.dim) fail(at + ".demand", "length must equal problem.dim");
      p.agents.push_back(std::move(a));
    }
  } else if (p.preset.empty()) {
    fail(where, "give a preset or an agent list");
  } else {
    (void)presets::problem_by_name(p.preset);
  }
  return p;
}

GraphSpec parse_graph(const json& j) {
  const std::string where = "graph";
  reject_unknown(j, where, {"preset", "n_agents", "edges_R", "edges_C"});
  GraphSpec g;
  const bool explicit_edges = j.contains("n_agents") || j.contains("edges_R") ||
                              j.contains("edges_C");
  g.preset = get_string(j, "preset", where, explicit_edges ? "" : g.preset);
  if (explicit_edges) {
    if (!g.preset.empty()) fail(where, "give either preset or edge lists, not both");
    g.n_agents = get_uint(j, "n_agents", where, 0);
    if (g.n_agents == 0) fail(where + ".n_agents", "must be at least 1");
    if (j.contains("edges_R")) g.edges_r = edge_list(j.at("edges_R"), where + ".edges_R");
    if (j.contains("edges_C")) g.edges_c = edge_list(j.at("edges_C"), where + ".edges_C");
    for (const auto* list : {&g.edges_r, &g.edges_c}) {
      for (const auto& [a, b] : *list) {
        if (a < 1 || b < 1 || a > g.n_agents || b > g.n_agents) {
          fail(where + (list == &g.edges_r ? ".edges_R" : ".edges_C"),
               "node index out of range 1.." + std::to_string(g.n_agents));
        }
      }
    }
  } else if (g.preset.empty()) {
    fail(where, "give a preset or explicit edge lists");
  } else {
    (void)presets::graph_by_name(g.preset);
  }
  return g;
}

void check_schedule(const GeometricSchedule& s, const std::string& initial,
                    const std::string& ratio) {
  if (!(s.initial >= 0.0)) fail(initial, "must be nonnegative");
  if (!(s.ratio > 0.0 && s.ratio < 1.0)) fail(ratio, "must lie in (0, 1)");
}

ScheduleSpec parse_schedules(const json& j) {
  const std::string where = "schedules";
  reject_unknown(j, where,
                 {"preset", "alpha0", "q", "theta_xi0", "q_xi", "theta_zeta0", "q_zeta", "gamma",
                  "phi", "seed", "beta0", "beta_ratio", "iota"});
  ScheduleSpec s;
  s.preset = get_string(j, "preset", where, "");
  if (!s.preset.empty()) s.values = presets::schedules_by_name(s.preset);
  ScheduleSet& v = s.values;
  v.alpha.initial = get_double(j, "alpha0", where, v.alpha.initial);
  v.alpha.ratio = get_double(j, "q", where, v.alpha.ratio);
  v.theta_xi.initial = get_double(j, "theta_xi0", where, v.theta_xi.initial);
  v.theta_xi.ratio = get_double(j, "q_xi", where, v.theta_xi.ratio);
  v.theta_zeta.initial = get_double(j, "theta_zeta0", where, v.theta_zeta.initial);
  v.theta_zeta.ratio = get_double(j, "q_zeta", where, v.theta_zeta.ratio);
  v.gamma = get_double(j, "gamma", where, v.gamma);
  v.phi = get_double(j, "phi", where, v.phi);
  s.seed = get_uint(j, "seed", where, s.seed);
  s.baseline.beta.initial = get_double(j, "beta0", where, s.baseline.beta.initial);
  s.baseline.beta.ratio = get_double(j, "beta_ratio", where, s.baseline.beta.ratio);
  s.baseline.iota = get_double(j, "iota", where, s.baseline.iota);

  check_schedule(v.alpha, where + ".alpha0", where + ".q");
  check_schedule(v.theta_xi, where + ".theta_xi0", where + ".q_xi");
  check_schedule(v.theta_zeta, where + ".theta_zeta0", where + ".q_zeta");
  check_schedule(s.baseline.beta, where + ".beta0", where + ".beta_ratio");
  if (!(v.gamma > 0.0 && v.gamma <= 1.0)) fail(where + ".gamma", "must lie in (0, 1]");
  if (!(v.phi > 0.0 && v.phi <= 1.0)) fail(where + ".phi", "must lie in (0, 1]");
  if (!(s.baseline.iota >= 0.0)) fail(where + ".iota", "must be nonnegative");
  return s;
}

RunSpec parse_run(const json& j) {
  const std::string where = "run";
  reject_unknown(j, where,
                 {"algorithm", "n_iters", "n_seeds", "delta", "audit", "out", "threads", "sweep",
                  "s0", "tilde_w0"});
  RunSpec r;
  const std::string algo = get_string(j, "algorithm", where, to_string(r.algorithm));
  try {
    r.algorithm = algorithm_from_string(algo);
  } catch (const std::invalid_argument& e) {
    fail(where + ".algorithm", e.what());
  }
  r.n_iters = get_uint(j, "n_iters", where, r.n_iters);
  if (r.n_iters == 0) fail(where + ".n_iters", "must be at least 1");
  r.n_seeds = get_uint(j, "n_seeds", where, r.n_seeds);
  if (r.n_seeds == 0) fail(where + ".n_seeds", "must be at least 1");
  r.delta = get_double(j, "delta", where, r.delta);
  if (!(r.delta >= 0.0)) fail(where + ".delta", "must be nonnegative");
  r.audit = get_bool(j, "audit", where, r.audit);
  r.out = get_string(j, "out", where, r.out);
  r.threads = get_uint(j, "threads", where, r.threads);
  if (j.contains("sweep")) {
    const json& sw = j.at("sweep");
    reject_unknown(sw, where + ".sweep", {"parameter", "grid"});
    r.sweep.parameter = get_string(sw, "parameter", where + ".sweep", r.sweep.parameter);
    if (r.sweep.parameter != "theta0" && r.sweep.parameter != "alpha0" &&
        r.sweep.parameter != "q") {
      fail(where + ".sweep.parameter", "must be theta0, alpha0 or q");
    }
    if (sw.contains("grid")) r.sweep.grid = number_list(sw.at("grid"), where + ".sweep.grid");
    if (r.sweep.grid.empty()) fail(where + ".sweep.grid", "must not be empty");
  }
  if (j.contains("s0")) r.s0 = matrix_from(j.at("s0"), where + ".s0");
  if (j.contains("tilde_w0")) r.tilde_w0 = matrix_from(j.at("tilde_w0"), where + ".tilde_w0");
  return r;
}

bool same(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->rows() == b->rows() && a->cols() == b->cols() && *a == *b;
}

json to_json(const RunConfig& c) {
  json problem;
  if (c.problem.agents.empty()) {
    problem["preset"] = c.problem.preset;
  } else {
    json agents = json::array();
    for (const auto& a : c.problem.agents) {
      agents.push_back({{"a", a.a}, {"b", a.b}, {"c", a.c}, {"lo", a.lo}, {"hi", a.hi},
                        {"demand", a.demand}});
    }
    problem["agents"] = agents;
  }
  problem["dim"] = c.problem.dim;

  json graph;
  if (c.graph.preset.empty()) {
    auto edges = [](const EdgeList& l) {
      json out = json::array();
      for (const auto& [a, b] : l) out.push_back({a, b});
      return out;
    };
    graph["n_agents"] = c.graph.n_agents;
    graph["edges_R"] = edges(c.graph.edges_r);
    graph["edges_C"] = edges(c.graph.edges_c);
  } else {
    graph["preset"] = c.graph.preset;
  }

  const ScheduleSet& v = c.schedules.values;
  json schedules{{"alpha0", v.alpha.initial},
                 {"q", v.alpha.ratio},
                 {"theta_xi0", v.theta_xi.initial},
                 {"q_xi", v.theta_xi.ratio},
                 {"theta_zeta0", v.theta_zeta.initial},
                 {"q_zeta", v.theta_zeta.ratio},
                 {"gamma", v.gamma},
                 {"phi", v.phi},
                 {"seed", c.schedules.seed},
                 {"beta0", c.schedules.baseline.beta.initial},
                 {"beta_ratio", c.schedules.baseline.beta.ratio},
                 {"iota", c.schedules.baseline.iota}};
  if (!c.schedules.preset.empty()) schedules["preset"] = c.schedules.preset;

  const RunSpec& r = c.run;
  json run{{"algorithm", to_string(r.algorithm)},
           {"n_iters", r.n_iters},
           {"n_seeds", r.n_seeds},
           {"delta", r.delta},
           {"audit", r.audit},
           {"out", r.out},
           {"threads", r.threads},
           {"sweep", {{"parameter", r.sweep.parameter}, {"grid", r.sweep.grid}}}};
  if (r.s0) run["s0"] = matrix_to(*r.s0);
  if (r.tilde_w0) run["tilde_w0"] = matrix_to(*r.tilde_w0);

  return json{{"problem", problem}, {"graph", graph}, {"schedules", schedules}, {"run", run}};
}

}  // namespace

bool RunSpec::operator==(const RunSpec& o) const {
  return algorithm == o.algorithm && n_iters == o.n_iters && n_seeds == o.n_seeds &&
         delta == o.delta && audit == o.audit && out == o.out && threads == o.threads &&
         sweep == o.sweep && same(s0, o.s0) && same(tilde_w0, o.tilde_w0);
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  reject_unknown(j, "config", {"problem", "graph", "schedules", "run"});
  RunConfig c;
  if (j.contains("problem")) c.problem = parse_problem(j.at("problem"));
  if (j.contains("graph")) c.graph = parse_graph(j.at("graph"));
  if (j.contains("schedules")) c.schedules = parse_schedules(j.at("schedules"));
  if (j.contains("run")) c.run = parse_run(j.at("run"));
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& config, bool pretty) {
  return detail::dump_json(to_json(config), pretty ? 2 : -1);
}

}  // namespace dpdgt
