#include "cbr/objectives.hpp"

#include "cbr/errors.hpp"

#include <cmath>

namespace cbr {

namespace {

void require_same_length(const DataVector& y, const Vector& forward) {
  if (static_cast<Eigen::Index>(y.size()) != forward.size()) {
    throw DimensionError("data length " + std::to_string(y.size()) +
                         " does not match forward length " + std::to_string(forward.size()));
  }
}

void require_positive_forward(const Vector& forward) {
  for (Eigen::Index i = 0; i < forward.size(); ++i) {
    if (!(forward[i] > 0.0)) {
      throw DomainError("(Hx)_" + std::to_string(i) + " must be > 0 for the Poisson model");
    }
  }
}

// sum_j (x_j g_j)^2
double weighted_square_norm(const Vector& x, const Vector& g) {
  return (x.array() * g.array()).square().sum();
}

// sum_j x_j^2 b_j
double weighted_sum(const Vector& x, const Vector& b) {
  return (x.array().square() * b.array()).sum();
}

Vector poisson_ratio(const DataVector& y, const Vector& forward) {
  require_positive_forward(forward);
  return (1.0 - y.values().array() / forward.array()).matrix();
}

}  // namespace

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("Gaussian sigma must be > 0");
  return NoiseModel(Kind::Gaussian, sigma);
}

NoiseModel NoiseModel::poisson() { return NoiseModel(Kind::Poisson, 0.0); }

std::string NoiseModel::name() const { return is_gaussian() ? "gaussian" : "poisson"; }

double d_ls(const DataVector& y, const Vector& forward) {
  require_same_length(y, forward);
  return (forward - y.values()).squaredNorm();
}

double d_ls(const DataVector& y, const ImageVector& x, const ForwardOperator& op) {
  return d_ls(y, op.apply(x.values()));
}

double d_kl(const DataVector& y, const Vector& forward) {
  require_same_length(y, forward);
  double total = 0.0;
  for (Eigen::Index i = 0; i < forward.size(); ++i) {
    const double yi = y.values()[i];
    const double hx = forward[i];
    if (yi < 0.0) throw DomainError("y_" + std::to_string(i) + " is negative");
    if (!(hx > 0.0)) throw DomainError("(Hx)_" + std::to_string(i) + " must be > 0");
    if (yi > 0.0) total += yi * std::log(yi / hx);
    total += hx - yi;
  }
  // Each term is >= 0 in exact arithmetic; clip the rounding residue.
  return total > 0.0 ? total : 0.0;
}

double d_kl(const DataVector& y, const ImageVector& x, const ForwardOperator& op) {
  return d_kl(y, op.apply(x.values()));
}

Vector likelihood_gradient(const DataVector& y, const Vector& forward, const ForwardOperator& op,
                           const NoiseModel& noise) {
  require_same_length(y, forward);
  if (noise.is_gaussian()) return op.adjoint_apply(forward - y.values());
  return op.adjoint_apply(poisson_ratio(y, forward));
}

double cbr_residual(const DataVector& y, const ImageVector& x, const Vector& forward,
                    const ForwardOperator& op, const NoiseModel& noise) {
  return weighted_square_norm(x.values(), likelihood_gradient(y, forward, op, noise));
}

double cbr_residual(const DataVector& y, const ImageVector& x, const ForwardOperator& op,
                    const NoiseModel& noise) {
  return cbr_residual(y, x, op.apply(x.values()), op, noise);
}

double cbr_expected(const ImageVector& x, const Vector& forward, const ForwardOperator& op,
                    const NoiseModel& noise) {
  if (noise.is_gaussian()) {
    // H_2^T (sigma^2 1) = sigma^2 H_2^T 1, the latter cached by the operator.
    const double variance = noise.sigma() * noise.sigma();
    return weighted_sum(x.values(), variance * op.squared_column_sums());
  }
  require_positive_forward(forward);
  return weighted_sum(x.values(), op.squared_adjoint_apply(forward.cwiseInverse()));
}

double cbr_expected(const ImageVector& x, const ForwardOperator& op, const NoiseModel& noise) {
  return cbr_expected(x, op.apply(x.values()), op, noise);
}

CbrTerms cbr_terms(const DataVector& y, const ImageVector& x, const Vector& forward,
                   const ForwardOperator& op, const NoiseModel& noise) {
  if (noise.is_gaussian()) {
    return {cbr_residual(y, x, forward, op, noise), cbr_expected(x, forward, op, noise)};
  }
  require_same_length(y, forward);
  const Vector ratio = poisson_ratio(y, forward);
  const auto [gradient, squared] = op.adjoint_pair(ratio, forward.cwiseInverse());
  return {weighted_square_norm(x.values(), gradient), weighted_sum(x.values(), squared)};
}

CbrTerms cbr_terms(const DataVector& y, const ImageVector& x, const Vector& forward,
                   const ForwardOperator& op, const NoiseModel& noise, const Vector& extra,
                   Vector& extra_backprojected) {
  require_same_length(y, forward);
  if (noise.is_gaussian()) {
    const Vector residual = forward - y.values();
    auto sweep = op.adjoint_sweep({&residual, &extra});
    extra_backprojected = std::move(sweep.plain[1]);
    return {weighted_square_norm(x.values(), sweep.plain[0]), cbr_expected(x, forward, op, noise)};
  }
  const Vector ratio = poisson_ratio(y, forward);
  const Vector inverse = forward.cwiseInverse();
  auto sweep = op.adjoint_sweep({&ratio, &extra}, &inverse);
  extra_backprojected = std::move(sweep.plain[1]);
  return {weighted_square_norm(x.values(), sweep.plain[0]), weighted_sum(x.values(), sweep.squared)};
}

}  // namespace cbr
