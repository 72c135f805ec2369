#pragma once

#include "cbr/objectives.hpp"
#include "cbr/operators.hpp"
#include "cbr/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cbr {

/// Circular Gaussian source; center in (col, row) pixel coordinates.
struct GaussianSource {
  std::string label;
  double col = 0.0;
  double row = 0.0;
  double variance = 1.0;   // pixels^2
  double amplitude = 1.0;  // peak intensity
};

struct PhantomSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<GaussianSource> sources;

  /// Throws DomainError naming the first violated invariant.
  void validate() const;
  GridShape shape() const { return {rows, cols}; }

  /// Four-footpoint flare configuration on a 64 x 64 grid: sources C, L,
  /// LR (lower right) and UR (upper right).
  static PhantomSpec flare64();
};

/// Pixel (c, r) = sum over sources of amplitude * exp(-((c-c0)^2 + (r-r0)^2) / (2 variance)).
ImageVector build_phantom(const PhantomSpec& spec);

/// Gaussian: clean + sigma * N(0, 1). Poisson: independent draws with mean
/// clean_i. Component i draws from CounterStream(seed, i).
DataVector sample_noise(const DataVector& clean, const NoiseModel& noise, std::uint64_t seed);

struct NoisySample {
  DataVector clean;
  DataVector noisy;
  std::uint64_t seed = 0;
  NoiseModel noise;
};

NoisySample simulate_data(const ForwardOperator& op, const ImageVector& truth,
                          const NoiseModel& noise, std::uint64_t seed);

struct CertificationOptions {
  int max_iterations = 20000;
  /// Stop early once ||x * grad|| falls below this.
  double gradient_tolerance = 1e-14;
  /// Minimum accepted floor (half the limit objective).
  double min_floor = 1e-6;
};

struct Certificate {
  bool outside_cone = false;
  /// Half the near-converged objective; a lower bound for every later iterate.
  double floor = 0.0;
  double limit_objective = 0.0;
  int iterations = 0;
  /// True when the Gaussian negative-component bound decided the outcome.
  bool from_negative_component = false;
};

/// Operational test for y not in H(C): runs the solver matching `noise` to
/// near-convergence and checks that the objective stays bounded away from
/// zero. For Gaussian data with a negative component the bound
/// D_LS >= sum(min(y, 0)^2) certifies directly.
Certificate certify_outside_cone(const ForwardOperator& op, const DataVector& y,
                                 const NoiseModel& noise, const CertificationOptions& options = {});

struct IllPosedOptions {
  NoiseModel noise = NoiseModel::poisson();
  /// Expected total of the clean data.
  double total_counts = 1e3;
  /// Relative amplitude of the alternating (-1)^i modulation applied to the
  /// clean data; 0 leaves only noise to push y out of the cone.
  double stripe_amplitude = 0.0;
  /// Number of point-like sources in the random zero-background object.
  int sources = 3;
  int max_attempts = 10;
  CertificationOptions certification;
};

struct IllPosedInstance {
  DataVector y;
  double floor = 0.0;
  ImageVector object;
  std::uint64_t seed = 0;
  Certificate certificate;
};

/// Builds data certified to lie outside H(C): a random sparse object on a
/// zero background is imaged, optionally modulated by an alternating
/// pattern, and noise is added. Retries with derived seeds up to
/// max_attempts times, then throws NumericalError.
IllPosedInstance build_ill_posed_instance(const ForwardOperator& op, std::uint64_t seed,
                                          const IllPosedOptions& options = {});

}  // namespace cbr
