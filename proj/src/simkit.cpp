#include "cbr/simkit.hpp"

#include "cbr/errors.hpp"
#include "cbr/rng.hpp"
#include "cbr/solvers.hpp"

#include <cmath>

namespace cbr {

namespace {

// Streams below this index are reserved for per-component noise.
constexpr std::uint64_t kObjectStream = std::uint64_t{1} << 62;
constexpr std::uint64_t kSeedStride = 0x9E3779B97F4A7C15ull;
constexpr int kGradientCheckInterval = 25;

}  // namespace

void PhantomSpec::validate() const {
  if (rows < 1 || cols < 1) throw DomainError("phantom grid dimensions must be >= 1");
  if (sources.empty()) throw DomainError("phantom needs at least one source");
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& src = sources[s];
    const std::string which = "source " + (src.label.empty() ? std::to_string(s) : src.label);
    if (!(src.variance > 0.0)) throw DomainError(which + ": variance must be > 0");
    if (!(src.amplitude > 0.0)) throw DomainError(which + ": amplitude must be > 0");
    if (!(src.col >= 0.0 && src.col <= static_cast<double>(cols - 1) && src.row >= 0.0 &&
          src.row <= static_cast<double>(rows - 1))) {
      throw DomainError(which + ": center lies outside the grid");
    }
  }
}

PhantomSpec PhantomSpec::flare64() {
  return PhantomSpec{64,
                     64,
                     {
                         {"C", 32.0, 32.0, 0.64, 1.6},
                         {"L", 16.0, 32.0, 0.64, 1.28},
                         {"LR", 42.0, 19.0, 0.64, 1.28},
                         {"UR", 42.0, 45.0, 0.48, 0.6},
                     }};
}

ImageVector build_phantom(const PhantomSpec& spec) {
  spec.validate();
  Vector values = Vector::Zero(static_cast<Eigen::Index>(spec.rows * spec.cols));
  for (std::size_t r = 0; r < spec.rows; ++r) {
    for (std::size_t c = 0; c < spec.cols; ++c) {
      double v = 0.0;
      for (const auto& src : spec.sources) {
        const double dc = static_cast<double>(c) - src.col;
        const double dr = static_cast<double>(r) - src.row;
        v += src.amplitude * std::exp(-(dc * dc + dr * dr) / (2.0 * src.variance));
      }
      values[static_cast<Eigen::Index>(r * spec.cols + c)] = v;
    }
  }
  return ImageVector(std::move(values), spec.shape());
}

DataVector sample_noise(const DataVector& clean, const NoiseModel& noise, std::uint64_t seed) {
  Vector out(static_cast<Eigen::Index>(clean.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    CounterStream rng(seed, static_cast<std::uint64_t>(i));
    const double mean = clean.values()[i];
    if (noise.is_gaussian()) {
      out[i] = mean + noise.sigma() * rng.normal();
    } else {
      if (mean < 0.0) {
        throw DomainError("Poisson noise needs a nonnegative mean; component " +
                          std::to_string(i) + " is negative");
      }
      out[i] = static_cast<double>(rng.poisson(mean));
    }
  }
  return DataVector(std::move(out));
}

NoisySample simulate_data(const ForwardOperator& op, const ImageVector& truth,
                          const NoiseModel& noise, std::uint64_t seed) {
  DataVector clean = apply(op, truth);
  DataVector noisy = sample_noise(clean, noise, seed);
  return NoisySample{std::move(clean), std::move(noisy), seed, noise};
}

Certificate certify_outside_cone(const ForwardOperator& op, const DataVector& y,
                                 const NoiseModel& noise, const CertificationOptions& options) {
  Certificate cert;
  if (noise.is_gaussian()) {
    // H >= 0 maps the orthant into the nonnegative orthant, so every
    // negative component contributes at least y_i^2 to D_LS.
    const double bound = y.values().cwiseMin(0.0).squaredNorm();
    if (bound > 0.0) {
      cert.limit_objective = bound;
      cert.floor = 0.5 * bound;
      cert.outside_cone = cert.floor > options.min_floor;
      cert.from_negative_component = true;
      if (cert.outside_cone) return cert;
    }
  }

  const SolverKind solver = noise.is_gaussian() ? SolverKind::Isra : SolverKind::Em;
  std::optional<IsraUpdate> isra;
  std::optional<EmUpdate> em;
  if (solver == SolverKind::Isra) {
    isra.emplace(op, y);
  } else {
    em.emplace(op, y);
  }
  IterationState state = IterationState::start(op, flux_matched_start(op, y));
  while (state.k < options.max_iterations) {
    state = isra ? (*isra)(state) : (*em)(state);
    if (state.k % kGradientCheckInterval == 0) {
      const double gradient_norm =
          std::sqrt(cbr_residual(y, state.iterate, state.forward, op, noise));
      if (gradient_norm < options.gradient_tolerance) break;
    }
  }
  cert.iterations = state.k;
  cert.limit_objective = noise.is_gaussian() ? d_ls(y, state.forward) : d_kl(y, state.forward);
  cert.floor = 0.5 * cert.limit_objective;
  cert.outside_cone = cert.floor > options.min_floor;
  cert.from_negative_component = false;
  return cert;
}

IllPosedInstance build_ill_posed_instance(const ForwardOperator& op, std::uint64_t seed,
                                          const IllPosedOptions& options) {
  if (options.sources < 1) throw DomainError("ill-posed instance needs at least one source");
  if (!(options.total_counts > 0.0)) throw DomainError("total_counts must be > 0");
  if (!(options.stripe_amplitude >= 0.0 && options.stripe_amplitude < 1.0)) {
    throw DomainError("stripe_amplitude must lie in [0, 1)");
  }
  const auto m = static_cast<Eigen::Index>(op.n_params());
  const auto n = static_cast<Eigen::Index>(op.n_data());

  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    const std::uint64_t attempt_seed = seed + static_cast<std::uint64_t>(attempt) * kSeedStride;
    CounterStream rng(attempt_seed, kObjectStream);
    Vector object = Vector::Zero(m);
    for (int s = 0; s < options.sources; ++s) {
      const auto j = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(m));
      object[j] += 0.5 + rng.uniform();
    }
    Vector clean = op.apply(object);
    clean *= options.total_counts / clean.sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      clean[i] *= 1.0 + options.stripe_amplitude * (i % 2 == 0 ? 1.0 : -1.0);
    }
    DataVector y = sample_noise(DataVector(std::move(clean)), options.noise, attempt_seed);
    if (options.noise.is_poisson() && !(y.sum() > 0.0)) continue;

    Certificate cert = certify_outside_cone(op, y, options.noise, options.certification);
    if (cert.outside_cone) {
      return IllPosedInstance{std::move(y), cert.floor, ImageVector(std::move(object)),
                              attempt_seed, cert};
    }
  }
  throw NumericalError("could not certify data outside H(C) after " +
                       std::to_string(options.max_attempts) + " attempts");
}

}  // namespace cbr
