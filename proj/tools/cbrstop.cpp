// Command-line front end: simulate, reconstruct, curves, sweep.

#include "cbr/commands.hpp"
#include "cbr/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string seeds;
  std::string rules;
  std::string tau;
  int max_iter = 0;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "experiment config file")->required();
  cmd->add_option("-o,--out", o.out, "output directory (overrides `out`)");
  cmd->add_option("--seeds", o.seeds, "comma-separated seeds (overrides `seeds`)");
  cmd->add_option("--max-iter", o.max_iter, "iteration cap (overrides `max_iter`)");
}

void add_rules(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--rule", o.rules, "comma-separated rule names (overrides `rules`)");
  cmd->add_option("--tau", o.tau, "threshold factor, or `default`");
}

cbr::ExperimentConfig resolve(const Overrides& o) {
  cbr::ExperimentConfig c = cbr::load_config(o.config);
  if (!o.out.empty()) c.out = o.out;
  if (!o.seeds.empty()) c.seeds = cbr::parse_seed_list(o.seeds);
  if (!o.rules.empty()) c.rules = cbr::parse_rule_list(o.rules);
  if (o.max_iter != 0) {
    if (o.max_iter < 1) throw cbr::ConfigError("max_iter", "must be >= 1");
    c.max_iter = o.max_iter;
  }
  if (!o.tau.empty()) {
    if (o.tau == "default") {
      c.tau.reset();
    } else {
      try {
        std::size_t used = 0;
        const double t = std::stod(o.tau, &used);
        if (used != o.tau.size() || !(t > 0.0)) throw std::invalid_argument("tau");
        c.tau = t;
      } catch (const std::logic_error&) {
        throw cbr::ConfigError("tau", "expected a positive number or `default`");
      }
    }
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative reconstruction with residual-based stopping rules"};
  app.require_subcommand(1);

  Overrides o;
  auto* simulate = app.add_subcommand("simulate", "write phantom, clean and noisy data");
  add_common(simulate, o);
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct and apply stopping rules");
  add_common(reconstruct, o);
  add_rules(reconstruct, o);
  auto* curves = app.add_subcommand("curves", "turn rule traces into plottable curves");
  add_common(curves, o);
  auto* sweep = app.add_subcommand("sweep", "stop iteration versus noise level");
  add_common(sweep, o);
  add_rules(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cbr::cli::kExitConfig;
  }

  try {
    const cbr::ExperimentConfig config = resolve(o);
    if (simulate->parsed()) return cbr::cli::cmd_simulate(config);
    if (reconstruct->parsed()) return cbr::cli::cmd_reconstruct(config);
    if (curves->parsed()) return cbr::cli::cmd_curves(config);
    return cbr::cli::cmd_sweep(config);
  } catch (const cbr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cbr::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cbr::cli::kExitRuntime;
  }
}
