#include "cbr/errors.hpp"
#include "cbr/evaluation.hpp"

#include <doctest.h>

#include <cmath>

using cbr::GridShape;
using cbr::ImageVector;
using cbr::PhantomSpec;
using cbr::Vector;

namespace {

ImageVector constant(std::size_t rows, std::size_t cols, double v) {
  return ImageVector(Vector::Constant(static_cast<Eigen::Index>(rows * cols), v),
                     GridShape{rows, cols});
}

}  // namespace

TEST_CASE("box flux of a constant image counts pixels") {
  const auto img = constant(40, 40, 1.0);
  CHECK(cbr::box_flux(img, {20, 20}, 13) == 169.0);
  CHECK(cbr::box_flux(img, {20.4, 19.6}, 13) == 169.0);
  // clipped at the corner: 7 x 7 remain
  CHECK(cbr::box_flux(img, {0, 0}, 13) == 49.0);
  CHECK(cbr::box_flux(img, {39, 20}, 3) == 6.0);
}

TEST_CASE("box flux of a delta image") {
  Vector v = Vector::Zero(100);
  v[GridShape{10, 10}.index(4, 6)] = 2.5;
  const ImageVector img(v, GridShape{10, 10});
  for (int side : {1, 3, 5, 13}) CHECK(cbr::box_flux(img, {4, 6}, side) == 2.5);
  CHECK(cbr::box_flux(img, {6, 6}, 3) == 0.0);
}

TEST_CASE("box flux arguments") {
  const auto img = constant(5, 5, 1.0);
  CHECK_THROWS_AS(cbr::box_flux(img, {2, 2}, 4), cbr::DomainError);
  CHECK_THROWS_AS(cbr::box_flux(img, {2, 2}, 0), cbr::DomainError);
  CHECK_THROWS_AS(cbr::box_flux(ImageVector(Vector::Ones(25)), {2, 2}, 3), cbr::DomainError);
}

TEST_CASE("box flux is additive over disjoint boxes") {
  Vector v(12 * 9);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::fmod(0.37 * i, 1.0);
  const ImageVector img(v, GridShape{9, 12});
  // three 3x3 boxes tiling a 9x3 strip at rows 3..5
  const double parts = cbr::box_flux(img, {1, 4}, 3) + cbr::box_flux(img, {4, 4}, 3) +
                       cbr::box_flux(img, {7, 4}, 3);
  double strip = 0.0;
  for (std::size_t r = 3; r <= 5; ++r)
    for (std::size_t c = 0; c <= 8; ++c) strip += img.at(c, r);
  CHECK(parts == doctest::Approx(strip).epsilon(1e-14));
}

TEST_CASE("photometry ratios") {
  const PhantomSpec spec = PhantomSpec::flare64();
  const auto truth = cbr::build_phantom(spec);
  const auto same = cbr::photometry(truth, truth, spec);
  REQUIRE(same.records.size() == 4);
  CHECK(same.box_side == 13);
  for (const auto& r : same.records) CHECK(r.ratio_percent == doctest::Approx(100.0).epsilon(1e-14));

  const auto zero = cbr::photometry(truth, constant(64, 64, 0.0), spec);
  for (const auto& r : zero.records) CHECK(r.ratio_percent == 0.0);

  const auto half = cbr::photometry(truth, truth.scaled(0.5), spec);
  for (const auto& r : half.records) CHECK(r.ratio_percent == doctest::Approx(50.0).epsilon(1e-14));

  const auto scaled = cbr::photometry(truth.scaled(7.0), truth.scaled(3.5), spec);
  for (std::size_t s = 0; s < 4; ++s) {
    CHECK(scaled.records[s].ratio_percent == doctest::Approx(half.records[s].ratio_percent));
  }
  CHECK(same.records[0].label == "C");

  CHECK_THROWS_AS(cbr::photometry(truth, constant(32, 32, 1.0), spec), cbr::DimensionError);
}

TEST_CASE("flare phantom source fluxes") {
  const PhantomSpec spec = PhantomSpec::flare64();
  const auto truth = cbr::build_phantom(spec);
  const auto report = cbr::photometry(truth, truth, spec);
  // Discrete Gaussian sum: close to 2 pi var amp for well-sampled sources.
  for (const auto& r : report.records) {
    const auto& src = *std::find_if(spec.sources.begin(), spec.sources.end(),
                                    [&](const auto& s) { return s.label == r.label; });
    CAPTURE(r.label);
    CHECK(r.true_flux == doctest::Approx(2 * M_PI * src.variance * src.amplitude).epsilon(0.05));
  }
  // Frozen value of the discrete box sum for source C.
  CHECK(report.records[0].true_flux == doctest::Approx(6.434).epsilon(1e-3));
}

TEST_CASE("l2 error trace and argmin") {
  const auto truth = constant(2, 2, 1.0);
  const std::vector<ImageVector> snaps{constant(2, 2, 3.0), constant(2, 2, 2.0),
                                       constant(2, 2, 1.5), constant(2, 2, 2.0)};
  const auto trace = cbr::l2_error_trace(snaps, truth);
  REQUIRE(trace.size() == 4);
  CHECK(trace[0] == 4.0);
  CHECK(trace[1] == 2.0);
  CHECK(trace[2] == 1.0);
  CHECK(cbr::argmin(trace) == 2);
  const std::vector<ImageVector> flat(3, constant(2, 2, 2.0));
  const auto c = cbr::l2_error_trace(flat, truth);
  CHECK(c[0] == c[1]);
  CHECK(c[1] == c[2]);
  CHECK(cbr::argmin(c) == 0);
  CHECK_THROWS_AS(cbr::argmin(std::vector<double>{}), cbr::DomainError);
  CHECK_THROWS_AS(cbr::l2_distance(truth, constant(3, 3, 1.0)), cbr::DimensionError);
}
