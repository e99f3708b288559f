#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpdgt/graph.hpp"
#include "dpdgt/schedules.hpp"
#include "dpdgt/solver.hpp"

namespace dpdgt {

struct AgentSpec {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> demand;  ///< length m

  bool operator==(const AgentSpec&) const = default;
};

/// Either a preset name or an explicit agent list.
struct ProblemSpec {
  std::string preset = "ieee14";
  std::size_t dim = 1;
  std::vector<AgentSpec> agents;

  bool operator==(const ProblemSpec&) const = default;
};

/// Either a preset name or explicit edge lists. Node indices are 1-based, as
/// in the config file.
struct GraphSpec {
  std::string preset = "ieee14";
  std::size_t n_agents = 0;
  EdgeList edges_r;
  EdgeList edges_c;

  bool operator==(const GraphSpec&) const = default;
};

/// Resolved schedule values. `preset` only records where they started from;
/// explicit keys in the file override it.
struct ScheduleSpec {
  std::string preset;
  ScheduleSet values;
  BaselineSchedule baseline;
  std::uint64_t seed = 0;

  bool operator==(const ScheduleSpec&) const = default;
};

struct SweepSpec {
  std::string parameter = "theta0";  ///< theta0, alpha0 or q
  std::vector<double> grid{0.0, 0.02, 0.05, 0.1};

  bool operator==(const SweepSpec&) const = default;
};

struct RunSpec {
  Algorithm algorithm = Algorithm::kDpdgt;
  std::size_t n_iters = 5000;
  std::size_t n_seeds = 200;
  /// Adjacency bound for the privacy report.
  double delta = 1.0;
  bool audit = false;
  std::string out = "out";
  /// Worker threads for sweeps and comparisons; 0 picks the hardware count.
  std::size_t threads = 0;
  SweepSpec sweep;
  /// Optional n x m initial values.
  std::optional<Matrix> s0;
  std::optional<Matrix> tilde_w0;

  bool operator==(const RunSpec& o) const;
};

struct RunConfig {
  ProblemSpec problem;
  GraphSpec graph;
  ScheduleSpec schedules;
  RunSpec run;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the JSON config. Missing keys keep their defaults; unknown keys and
/// out-of-range values throw std::invalid_argument naming the field
/// (e.g. "schedules.q").
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// JSON text that parse_config maps back to an equal RunConfig. Floats are
/// written with 17 significant digits.
std::string serialize_config(const RunConfig& config, bool pretty = true);

}  // namespace dpdgt
