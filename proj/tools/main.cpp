// dpdgt: command-line front end for the simulator.
//
//   dpdgt run     --config cfg.json [--seed N] [--iters K] [--out DIR] [--audit]
//   dpdgt sweep   --config cfg.json ...
//   dpdgt compare --config cfg.json ...
//   dpdgt privacy --config cfg.json ...
//   dpdgt solve   --config cfg.json ...
//
// Without --config the built-in ieee14 problem, graph and schedules are used.

#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dpdgt/config.hpp"
#include "dpdgt/errors.hpp"
#include "dpdgt/harness.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iters;
  std::optional<std::string> out;
  bool audit = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "root seed (overrides schedules.seed)");
  cmd->add_option("--iters", f.iters, "iterations per run (overrides run.n_iters)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory (overrides run.out)");
  cmd->add_flag("--audit", f.audit, "record noise draws and transmitted values");
}

dpdgt::RunConfig resolve(const Flags& f) {
  dpdgt::RunConfig c = f.config.empty() ? dpdgt::RunConfig{} : dpdgt::load_config(f.config);
  if (f.seed) c.schedules.seed = *f.seed;
  if (f.iters) c.run.n_iters = *f.iters;
  if (f.out) c.run.out = *f.out;
  if (f.audit) c.run.audit = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private distributed resource allocation simulator"};
  app.require_subcommand(1);

  using Handler = std::function<std::string(const dpdgt::RunConfig&, const std::filesystem::path&)>;
  const std::map<std::string, std::pair<std::string, Handler>> commands{
      {"run", {"single run; writes metrics.csv and summary.json", dpdgt::cli_run}},
      {"sweep", {"Monte-Carlo sweep over run.sweep.grid; writes sweep.csv", dpdgt::cli_sweep}},
      {"compare", {"DP-DGT against the noisy baseline on shared noise", dpdgt::cli_compare}},
      {"privacy", {"condition verdicts and privacy budget; writes privacy.json",
                   dpdgt::cli_privacy}},
      {"solve", {"centralized optimum only; writes solve.json", dpdgt::cli_solve}},
  };

  Flags flags;
  std::map<CLI::App*, const Handler*> handlers;
  for (const auto& [name, entry] : commands) {
    CLI::App* cmd = app.add_subcommand(name, entry.first);
    add_flags(cmd, flags);
    handlers[cmd] = &entry.second;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const dpdgt::RunConfig config = resolve(flags);
    for (const auto& [cmd, handler] : handlers) {
      if (cmd->parsed()) std::cout << (*handler)(config, config.run.out) << '\n';
    }
  } catch (const dpdgt::InfeasibleProblem& e) {
    std::cerr << "error: infeasible problem: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
