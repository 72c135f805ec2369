#pragma once

#include "cbr/objectives.hpp"
#include "cbr/operators.hpp"
#include "cbr/simkit.hpp"
#include "cbr/solvers.hpp"
#include "cbr/stopping.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cbr {

enum class OperatorKind { Blur, Dense, File };

struct OperatorConfig {
  OperatorKind kind = OperatorKind::Blur;
  // blur
  std::size_t rows = 0;
  std::size_t cols = 0;
  double psf_sigma = 2.0;
  Boundary boundary = Boundary::Truncated;
  double gain = 1.0;
  // dense
  std::size_t n = 0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  // blur and dense
  double floor = 1e-6;
  // file
  std::filesystem::path file;
};

/// Everything a command needs; parsed from the flat `key = value` format
/// described in docs/config.md.
struct ExperimentConfig {
  OperatorConfig op;
  std::vector<GaussianSource> sources;
  /// Grid for the phantom; defaults to the blur grid.
  std::optional<GridShape> phantom_grid;
  NoiseModel noise = NoiseModel::poisson();
  /// Poisson only: scale the truth so that sum(H truth) equals this.
  std::optional<double> total_counts;
  std::vector<std::uint64_t> seeds{1};
  std::optional<SolverKind> solver;
  std::vector<RuleKind> rules;
  /// nullopt means the per-rule default tau.
  std::optional<double> tau;
  int max_iter = kDefaultMaxIterations;
  std::filesystem::path out = "out";
  /// Directory holding inputs produced by an earlier command; defaults to out.
  std::optional<std::filesystem::path> data_dir;
  std::optional<std::filesystem::path> data_file;
  std::optional<std::filesystem::path> truth_file;
  bool fail_on_no_stop = false;
  std::vector<double> sweep_levels;
  int box_side = 13;

  SolverKind resolved_solver() const;
  std::filesystem::path input_dir() const { return data_dir.value_or(out); }
  /// Phantom spec built from sources and grid; throws ConfigError without sources.
  PhantomSpec phantom_spec() const;
};

/// Throws ConfigError naming the offending key (with its line number).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(format_config(c)) reproduces c.
std::string format_config(const ExperimentConfig& config);

/// Cross-field checks shared by all commands: solver/noise/rule
/// compatibility, nonempty seeds, max_iter >= 1.
void validate(const ExperimentConfig& config);

std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<RuleKind> parse_rule_list(std::string_view text);

ForwardOperator build_operator(const OperatorConfig& config);

}  // namespace cbr
