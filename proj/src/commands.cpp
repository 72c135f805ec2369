#include "cbr/commands.hpp"

#include "cbr/errors.hpp"
#include "cbr/evaluation.hpp"
#include "cbr/io.hpp"
#include "cbr/simkit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>

namespace cbr::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kVersion = "cbrstop 1.0";

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  }
}

void write_manifest(const ExperimentConfig& config, std::string_view command,
                    const std::vector<std::string>& outputs) {
  std::string text = fmt::format("# {} manifest\n# command = {}\n", kVersion, command);
  for (const auto& name : outputs) text += "# output = " + name + "\n";
  text += format_config(config);
  io::write_text_file(config.out / kManifestName, text);
}

std::optional<GridShape> image_grid(const ExperimentConfig& config, std::size_t n_params) {
  if (config.phantom_grid && config.phantom_grid->size() == n_params) return config.phantom_grid;
  if (config.op.kind == OperatorKind::Blur && config.op.rows * config.op.cols == n_params) {
    return GridShape{config.op.rows, config.op.cols};
  }
  return std::nullopt;
}

/// Phantom scaled to the configured total counts, if any.
ImageVector scaled_truth(const ImageVector& phantom, const ForwardOperator& op,
                         std::optional<double> total_counts) {
  if (!total_counts) return phantom;
  const double flux = op.apply(phantom.values()).sum();
  return phantom.scaled(*total_counts / flux);
}

StoppingRule make_rule(RuleKind kind, const ExperimentConfig& config, const DataVector& y,
                       const ForwardOperator& op, const std::optional<ImageVector>& truth) {
  if (kind == RuleKind::L2Oracle) {
    if (!truth) throw ConfigError("rules", "l2_oracle needs a known truth image");
    return StoppingRule::l2_oracle(*truth);
  }
  const double tau = config.tau ? *config.tau : default_tau(kind, config.noise, y, op.n_data());
  return StoppingRule(kind, tau);
}

std::vector<StoppingRule> make_rules(const ExperimentConfig& config, const DataVector& y,
                                     const ForwardOperator& op,
                                     const std::optional<ImageVector>& truth) {
  if (config.rules.empty()) throw ConfigError("rules", "at least one rule is required");
  std::vector<StoppingRule> rules;
  for (const auto kind : config.rules) rules.push_back(make_rule(kind, config, y, op, truth));
  return rules;
}

ForwardOperator checked_operator(const ExperimentConfig& config) {
  validate(config);
  return build_operator(config.op);
}

double median(std::vector<int> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::string noisy_file_name(std::uint64_t seed) { return fmt::format("noisy_seed{}.csv", seed); }

std::string run_file_stem(RuleKind rule, std::uint64_t seed) {
  return fmt::format("{}_seed{}", to_string(rule), seed);
}

int cmd_simulate(const ExperimentConfig& config) {
  const ForwardOperator op = checked_operator(config);
  const PhantomSpec spec = config.phantom_spec();
  if (spec.shape().size() != op.n_params()) {
    throw ConfigError("phantom.rows", "phantom grid does not match operator M = " +
                                          std::to_string(op.n_params()));
  }
  const ImageVector truth = scaled_truth(build_phantom(spec), op, config.total_counts);
  const DataVector clean = apply(op, truth);

  ensure_directory(config.out);
  std::vector<std::string> outputs{"phantom.csv", "phantom.pgm", "clean.csv"};
  io::write_image_csv(config.out / "phantom.csv", truth);
  io::write_pgm(config.out / "phantom.pgm", truth);
  io::write_data_csv(config.out / "clean.csv", clean);
  for (const auto seed : config.seeds) {
    outputs.push_back(noisy_file_name(seed));
    io::write_data_csv(config.out / outputs.back(), sample_noise(clean, config.noise, seed));
  }
  write_manifest(config, "simulate", outputs);
  return kExitOk;
}

int cmd_reconstruct(const ExperimentConfig& config) {
  const ForwardOperator op = checked_operator(config);
  const SolverKind solver = config.resolved_solver();
  const fs::path input = config.input_dir();

  struct Dataset {
    std::uint64_t seed;
    DataVector y;
  };
  std::vector<Dataset> datasets;
  if (config.data_file) {
    datasets.push_back({config.seeds.front(), io::read_data_csv(*config.data_file)});
  } else {
    for (const auto seed : config.seeds) {
      const fs::path path = input / noisy_file_name(seed);
      if (!fs::exists(path)) throw Error("missing input " + path.string());
      datasets.push_back({seed, io::read_data_csv(path)});
    }
  }

  std::optional<ImageVector> truth;
  if (config.truth_file) {
    truth = io::read_image_csv(*config.truth_file);
  } else if (fs::exists(input / "phantom.csv")) {
    truth = io::read_image_csv(input / "phantom.csv");
  }
  const std::optional<GridShape> grid =
      truth && truth->shape() ? truth->shape() : image_grid(config, op.n_params());
  if (truth && truth->size() != op.n_params()) {
    throw Error("truth image length does not match operator M = " + std::to_string(op.n_params()));
  }
  std::optional<PhantomSpec> spec;
  if (truth && grid && !config.sources.empty()) spec = config.phantom_spec();

  ensure_directory(config.out);
  std::vector<std::string> outputs;
  std::string summary = "seed,rule,tau,stop_iteration,stop_reason,selected_iteration,objective\n";
  bool all_fired = true;

  for (const auto& data : datasets) {
    if (data.y.size() != op.n_data()) {
      throw Error("data length " + std::to_string(data.y.size()) + " does not match operator N = " +
                  std::to_string(op.n_data()));
    }
    std::vector<StoppingRule> rules = make_rules(config, data.y, op, truth);
    ImageVector x0 = flux_matched_start(op, data.y, grid);
    const TrackingResult result = track(op, data.y, config.noise, solver, std::move(rules),
                                        std::move(x0), config.max_iter, TrackUntil::AllFired);

    for (const auto& tracked : result.rules) {
      const std::string stem = run_file_stem(tracked.rule.kind(), data.seed);
      const ImageVector image = tracked.selected.with_shape(grid);
      outputs.push_back("recon_" + stem + ".csv");
      io::write_image_csv(config.out / outputs.back(), image);
      if (grid) {
        outputs.push_back("recon_" + stem + ".pgm");
        io::write_pgm(config.out / outputs.back(), image);
      }
      outputs.push_back("trace_" + stem + ".csv");
      io::write_trace_csv(config.out / outputs.back(), tracked.trace);
      if (spec) {
        outputs.push_back("photometry_" + stem + ".csv");
        io::write_photometry_csv(config.out / outputs.back(),
                                 photometry(*truth, image, *spec, config.box_side));
      }
      const int stop = tracked.fired_at.value_or(result.iterations);
      const StopReason reason = tracked.fired_at ? StopReason::RuleFired : StopReason::MaxIterations;
      all_fired = all_fired && tracked.fired_at.has_value();
      summary += fmt::format(
          "{},{},{},{},{},{},{}\n", data.seed, tracked.rule.name(),
          io::format_number(tracked.rule.tau()), stop, to_string(reason),
          tracked.selected_iteration,
          io::format_number(result.objective_trace[static_cast<std::size_t>(tracked.selected_iteration)]));
    }
  }
  outputs.emplace_back("summary.csv");
  io::write_text_file(config.out / "summary.csv", summary);
  write_manifest(config, "reconstruct", outputs);
  return config.fail_on_no_stop && !all_fired ? kExitNoStop : kExitOk;
}

int cmd_curves(const ExperimentConfig& config) {
  const fs::path input = config.input_dir();
  if (!fs::is_directory(input)) throw Error("no reconstruct run found in " + input.string());
  std::vector<fs::path> traces;
  for (const auto& entry : fs::directory_iterator(input)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("trace_") && name.ends_with(".csv")) {
      traces.push_back(entry.path());
    }
  }
  if (traces.empty()) throw Error("no trace files found in " + input.string());
  std::sort(traces.begin(), traces.end());

  ensure_directory(config.out);
  std::vector<std::string> outputs;
  for (const auto& path : traces) {
    const RuleTrace trace = io::read_trace_csv(path);
    if (trace.records.empty()) throw Error("trace " + path.string() + " is empty");
    const std::optional<int> first = trace.first_fired();
    std::string text = "k,lhs,rhs,fired,first_fire\n";
    for (const auto& r : trace.records) {
      text += fmt::format("{},{},{},{},{}\n", r.k, io::format_number(r.lhs),
                          io::format_number(r.rhs), r.fired ? 1 : 0,
                          first && *first == r.k ? 1 : 0);
    }
    const std::string stem = path.stem().string().substr(std::string_view("trace_").size());
    outputs.push_back("curves_" + stem + ".csv");
    io::write_text_file(config.out / outputs.back(), text);
  }
  write_manifest(config, "curves", outputs);
  return kExitOk;
}

SweepTable run_sweep(const ExperimentConfig& config) {
  if (config.sweep_levels.size() < 2) {
    throw ConfigError("sweep.levels", "a sweep needs at least two noise levels");
  }
  for (const double level : config.sweep_levels) {
    if (!(level > 0.0)) throw ConfigError("sweep.levels", "noise levels must be > 0");
  }
  if (config.seeds.size() < 3) throw ConfigError("seeds", "a sweep needs at least three seeds");
  if (config.rules.empty()) throw ConfigError("rules", "at least one rule is required");
  const ForwardOperator op = checked_operator(config);
  const PhantomSpec spec = config.phantom_spec();
  if (spec.shape().size() != op.n_params()) {
    throw ConfigError("phantom.rows", "phantom grid does not match operator M = " +
                                          std::to_string(op.n_params()));
  }
  const ImageVector phantom = build_phantom(spec);
  const SolverKind solver = config.resolved_solver();

  SweepTable table;
  for (const double level : config.sweep_levels) {
    const NoiseModel noise = config.noise.is_gaussian() ? NoiseModel::gaussian(level)
                                                        : NoiseModel::poisson();
    const ImageVector truth = config.noise.is_gaussian()
                                  ? phantom
                                  : scaled_truth(phantom, op, level);
    ExperimentConfig level_config = config;
    level_config.noise = noise;
    const DataVector clean = apply(op, truth);
    for (const auto seed : config.seeds) {
      const DataVector y = sample_noise(clean, noise, seed);
      const TrackingResult result =
          track(op, y, noise, solver, make_rules(level_config, y, op, truth), std::nullopt,
                config.max_iter, TrackUntil::AllFired);
      for (const auto& tracked : result.rules) {
        table.rows.push_back({tracked.rule.kind(), level, seed,
                              tracked.fired_at.value_or(result.iterations),
                              tracked.fired_at ? StopReason::RuleFired : StopReason::MaxIterations});
      }
    }
  }

  for (const auto kind : config.rules) {
    for (const double level : config.sweep_levels) {
      std::vector<int> stops;
      for (const auto& row : table.rows) {
        if (row.rule == kind && row.level == level) stops.push_back(row.stop_iteration);
      }
      table.summary.push_back({kind, level, median(std::move(stops))});
    }
  }
  return table;
}

int cmd_sweep(const ExperimentConfig& config) {
  const SweepTable table = run_sweep(config);
  ensure_directory(config.out);
  std::string rows = "rule,level,seed,stop_iteration,stop_reason\n";
  bool all_fired = true;
  for (const auto& r : table.rows) {
    rows += fmt::format("{},{},{},{},{}\n", to_string(r.rule), io::format_number(r.level), r.seed,
                        r.stop_iteration, to_string(r.reason));
    all_fired = all_fired && r.reason == StopReason::RuleFired;
  }
  std::string summary = "rule,level,median_stop_iteration\n";
  for (const auto& s : table.summary) {
    summary += fmt::format("{},{},{}\n", to_string(s.rule), io::format_number(s.level),
                           io::format_number(s.median_stop));
  }
  io::write_text_file(config.out / "sweep.csv", rows);
  io::write_text_file(config.out / "sweep_summary.csv", summary);
  write_manifest(config, "sweep", {"sweep.csv", "sweep_summary.csv"});
  return config.fail_on_no_stop && !all_fired ? kExitNoStop : kExitOk;
}

}  // namespace cbr::cli
