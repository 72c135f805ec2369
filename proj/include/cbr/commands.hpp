#pragma once

#include "cbr/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cbr::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitNoStop = 4;

inline constexpr const char* kManifestName = "manifest.txt";

std::string noisy_file_name(std::uint64_t seed);
std::string run_file_stem(RuleKind rule, std::uint64_t seed);

/// Writes phantom.csv/.pgm, clean.csv, noisy_seed<S>.csv per seed, then the manifest.
int cmd_simulate(const ExperimentConfig& config);

/// Reconstructs every dataset with all configured rules watching a single
/// iteration sequence; writes recon_<rule>_seed<S>.{csv,pgm},
/// trace_<rule>_seed<S>.csv, photometry_<rule>_seed<S>.csv (when the
/// truth is known), summary.csv, then the manifest.
int cmd_reconstruct(const ExperimentConfig& config);

/// Turns the traces of a reconstruct run into curves_<rule>_seed<S>.csv
/// with a first_fire flag column.
int cmd_curves(const ExperimentConfig& config);

struct SweepRow {
  RuleKind rule;
  double level = 0.0;
  std::uint64_t seed = 0;
  int stop_iteration = 0;
  StopReason reason = StopReason::MaxIterations;
};

struct SweepSummaryRow {
  RuleKind rule;
  double level = 0.0;
  double median_stop = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SweepSummaryRow> summary;
};

/// Runs the stop-iteration sweep in memory. Levels are Gaussian sigmas or
/// Poisson total counts, depending on the noise model.
SweepTable run_sweep(const ExperimentConfig& config);

/// run_sweep plus sweep.csv, sweep_summary.csv and the manifest.
int cmd_sweep(const ExperimentConfig& config);

}  // namespace cbr::cli
