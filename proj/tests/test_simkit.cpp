#include "cbr/errors.hpp"
#include "cbr/simkit.hpp"
#include "cbr/solvers.hpp"

#include "oracle.hpp"

#include <doctest.h>

#include <cmath>

using cbr::DataVector;
using cbr::GaussianSource;
using cbr::ImageVector;
using cbr::NoiseModel;
using cbr::PhantomSpec;
using cbr::Vector;

TEST_CASE("flare phantom peak and geometry") {
  const auto spec = PhantomSpec::flare64();
  const auto img = cbr::build_phantom(spec);
  REQUIRE(img.shape().has_value());
  CHECK(img.size() == 64 * 64);
  // Neighbouring sources add a negligible tail at the C center.
  CHECK(img.at(32, 32) == doctest::Approx(1.6).epsilon(1e-12));
  CHECK(img.at(16, 32) == doctest::Approx(1.28).epsilon(1e-12));
  CHECK(img.at(42, 19) == doctest::Approx(1.28).epsilon(1e-12));
  CHECK(img.at(42, 45) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(img.values().minCoeff() >= 0.0);
}

TEST_CASE("phantom pixels follow the Gaussian formula") {
  PhantomSpec spec{9, 11, {{"a", 3.0, 4.0, 1.5, 2.0}, {"b", 7.5, 2.0, 0.7, 0.5}}};
  const auto img = cbr::build_phantom(spec);
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 11; ++c) {
      double v = 0.0;
      for (const auto& s : spec.sources) {
        const double d2 = (c - s.col) * (c - s.col) + (r - s.row) * (r - s.row);
        v += s.amplitude * std::exp(-d2 / (2 * s.variance));
      }
      CHECK(img.at(c, r) == doctest::Approx(v).epsilon(1e-14));
    }
  }
}

TEST_CASE("single source value at its center and decay bound") {
  PhantomSpec spec{40, 40, {{"s", 20.0, 20.0, 1.0, 3.0}}};
  const auto img = cbr::build_phantom(spec);
  CHECK(img.at(20, 20) == 3.0);
  // distance 4 * variance = 4 pixels away: exp(-8)
  CHECK(img.at(24, 20) <= 3.0 * std::exp(-8.0) * (1 + 1e-12));
  CHECK(img.at(36, 36) <= 3.0 * std::exp(-8.0));
}

TEST_CASE("phantom spec validation") {
  CHECK_THROWS_AS(cbr::build_phantom(PhantomSpec{8, 8, {}}), cbr::DomainError);
  CHECK_THROWS_AS(cbr::build_phantom(PhantomSpec{8, 8, {{"x", 9.0, 1.0, 1.0, 1.0}}}),
                  cbr::DomainError);
  CHECK_THROWS_AS(cbr::build_phantom(PhantomSpec{8, 8, {{"x", 1.0, 1.0, 0.0, 1.0}}}),
                  cbr::DomainError);
  CHECK_THROWS_AS(cbr::build_phantom(PhantomSpec{8, 8, {{"x", 1.0, 1.0, 1.0, -1.0}}}),
                  cbr::DomainError);
  CHECK_THROWS_AS(cbr::build_phantom(PhantomSpec{0, 8, {{"x", 0.0, 0.0, 1.0, 1.0}}}),
                  cbr::DomainError);
}

TEST_CASE("phantom is a pure function") {
  const auto a = cbr::build_phantom(PhantomSpec::flare64());
  const auto b = cbr::build_phantom(PhantomSpec::flare64());
  CHECK(a.values() == b.values());
}

TEST_CASE("noise determinism and vanishing Gaussian noise") {
  const DataVector clean(Vector::LinSpaced(50, 1.0, 50.0));
  const auto g = NoiseModel::gaussian(1e-12);
  const auto a = cbr::sample_noise(clean, g, 17);
  CHECK((a.values() - clean.values()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.values() == cbr::sample_noise(clean, g, 17).values());
  const auto p = cbr::sample_noise(clean, NoiseModel::poisson(), 17);
  CHECK(p.values() == cbr::sample_noise(clean, NoiseModel::poisson(), 17).values());
  CHECK(p.values() != cbr::sample_noise(clean, NoiseModel::poisson(), 18).values());
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == std::floor(p[i]));
}

TEST_CASE("noise draws do not depend on the other components") {
  const DataVector a(Vector::Constant(5, 40.0));
  Vector longer = Vector::Constant(9, 40.0);
  longer[7] = 3.0;
  const DataVector b(longer);
  const auto na = cbr::sample_noise(a, NoiseModel::poisson(), 4);
  const auto nb = cbr::sample_noise(b, NoiseModel::poisson(), 4);
  for (std::size_t i = 0; i < 5; ++i) CHECK(na[i] == nb[i]);
}

TEST_CASE("poisson noise: zero mean gives zero, negative mean is rejected") {
  const DataVector clean(Vector::Zero(4));
  CHECK(cbr::sample_noise(clean, NoiseModel::poisson(), 1).values() == Vector::Zero(4));
  CHECK_THROWS_AS(cbr::sample_noise(DataVector(Vector::Constant(2, -1.0)), NoiseModel::poisson(), 1),
                  cbr::DomainError);
}

TEST_CASE("poisson sampler calibration over 10000 seeds") {
  const DataVector clean(Vector::Constant(3, 1000.0));
  Vector sum = Vector::Zero(3);
  const int n = 10000;
  for (int s = 0; s < n; ++s) sum += cbr::sample_noise(clean, NoiseModel::poisson(), s).values();
  const Vector mean = sum / n;
  for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - 1000.0) < 3.0 * std::sqrt(1000.0 / n));
}

TEST_CASE("gaussian sampler variance within 2 percent") {
  const DataVector clean(Vector::Constant(100000, 5.0));
  const auto y = cbr::sample_noise(clean, NoiseModel::gaussian(3.0), 12);
  const Vector r = y.values() - clean.values();
  const double mean = r.mean();
  const double var = (r.array() - mean).square().sum() / (r.size() - 1);
  CHECK(std::abs(var / 9.0 - 1.0) < 0.02);
}

TEST_CASE("simulate data keeps clean equal to H truth") {
  const auto op = cbr::build_blur_operator(6, 6, 1.0);
  const auto truth = cbr::build_phantom(PhantomSpec{6, 6, {{"a", 2, 3, 1.0, 50.0}}});
  const auto s = cbr::simulate_data(op, truth, NoiseModel::poisson(), 9);
  CHECK((s.clean.values() - op.apply(truth.values())).norm() == 0.0);
  CHECK(s.seed == 9);
  CHECK(s.noisy.nonnegative());
}

TEST_CASE("negative Gaussian component certifies directly") {
  const auto op = cbr::build_dense_positive(4, 3, 1, 0.1);
  Vector y(4);
  y << 1.0, -0.5, 2.0, 3.0;
  const auto cert = cbr::certify_outside_cone(op, DataVector(y), NoiseModel::gaussian(1.0));
  CHECK(cert.outside_cone);
  CHECK(cert.from_negative_component);
  CHECK(cert.floor == doctest::Approx(0.125));
}

TEST_CASE("exact data fails certification") {
  const auto op = cbr::build_dense_positive(12, 5, 2, 0.1);
  const ImageVector x(oracle::to_vector(oracle::random_vec(5, 3, 0.5, 2.0)));
  const DataVector y = cbr::apply(op, x);
  cbr::CertificationOptions opts;
  opts.max_iterations = 5000;
  CHECK_FALSE(cbr::certify_outside_cone(op, y, NoiseModel::poisson(), opts).outside_cone);
  CHECK_FALSE(cbr::certify_outside_cone(op, y, NoiseModel::gaussian(1.0), opts).outside_cone);
}

TEST_CASE("ill-posed Poisson instance on a 16x16 blur") {
  const auto op = cbr::build_blur_operator(16, 16, 1.5);
  cbr::IllPosedOptions opts;
  opts.total_counts = 1e3;
  opts.certification.max_iterations = 3000;
  const auto inst = cbr::build_ill_posed_instance(op, 5, opts);
  CHECK(inst.certificate.outside_cone);
  CHECK(inst.floor > 1e-6);
  // The floor is respected by a later long run.
  const auto r = cbr::run(op, inst.y, NoiseModel::poisson(), cbr::SolverKind::Em,
                          cbr::StoppingRule(cbr::RuleKind::PoissonDiscrepancy, 1e-30),
                          std::nullopt, 5000);
  CHECK(r.objective_trace.back() >= inst.floor);

  const auto again = cbr::build_ill_posed_instance(op, 5, opts);
  CHECK(again.y.values() == inst.y.values());
}

TEST_CASE("ill-posed Gaussian instance via negative components") {
  const auto op = cbr::build_blur_operator(8, 8, 1.0);
  cbr::IllPosedOptions opts;
  opts.noise = NoiseModel::gaussian(1.0);
  opts.total_counts = 10.0;
  const auto inst = cbr::build_ill_posed_instance(op, 1, opts);
  CHECK(inst.certificate.outside_cone);
  const auto r = cbr::run(op, inst.y, opts.noise, cbr::SolverKind::Isra,
                          cbr::StoppingRule(cbr::RuleKind::MorozovGaussian, 1e-30), std::nullopt,
                          5000);
  CHECK(r.objective_trace.back() >= inst.floor);
}

TEST_CASE("ill-posed construction gives up on unreachable floors") {
  const auto op = cbr::build_dense_positive(3, 6, 1, 0.1);
  cbr::IllPosedOptions opts;
  opts.total_counts = 1e4;
  opts.max_attempts = 2;
  opts.certification.max_iterations = 200;
  opts.certification.min_floor = 1e6;
  CHECK_THROWS_AS(cbr::build_ill_posed_instance(op, 1, opts), cbr::NumericalError);
}
