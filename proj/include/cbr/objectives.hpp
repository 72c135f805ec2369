#pragma once

#include "cbr/operators.hpp"
#include "cbr/types.hpp"

#include <string>

namespace cbr {

/// Statistical model of the data: homoscedastic white Gaussian noise with
/// standard deviation sigma, or independent Poisson counts.
class NoiseModel {
 public:
  enum class Kind { Gaussian, Poisson };

  static NoiseModel gaussian(double sigma);
  static NoiseModel poisson();

  Kind kind() const { return kind_; }
  bool is_gaussian() const { return kind_ == Kind::Gaussian; }
  bool is_poisson() const { return kind_ == Kind::Poisson; }
  /// Standard deviation; only meaningful for the Gaussian model.
  double sigma() const { return sigma_; }
  std::string name() const;

  bool operator==(const NoiseModel&) const = default;

 private:
  NoiseModel(Kind kind, double sigma) : kind_(kind), sigma_(sigma) {}

  Kind kind_;
  double sigma_;
};

// Functions taking a `forward` vector expect it to equal op.apply(x); the
// solvers keep that product cached so rules and objectives do not redo it.

/// ||Hx - y||^2
double d_ls(const DataVector& y, const ImageVector& x, const ForwardOperator& op);
double d_ls(const DataVector& y, const Vector& forward);

/// sum_i y_i log(y_i / (Hx)_i) + (Hx)_i - y_i, with 0 log 0 = 0.
double d_kl(const DataVector& y, const ImageVector& x, const ForwardOperator& op);
double d_kl(const DataVector& y, const Vector& forward);

/// Gradient of the negative log-likelihood in the form used by the CBR:
/// H^T (Hx - y) for Gaussian noise (no factor 2), H^T (1 - y / Hx) for Poisson.
Vector likelihood_gradient(const DataVector& y, const Vector& forward, const ForwardOperator& op,
                           const NoiseModel& noise);

/// Constrained backprojected residual ||x * grad||^2 (elementwise product).
double cbr_residual(const DataVector& y, const ImageVector& x, const ForwardOperator& op,
                    const NoiseModel& noise);
double cbr_residual(const DataVector& y, const ImageVector& x, const Vector& forward,
                    const ForwardOperator& op, const NoiseModel& noise);

/// Expected value of the CBR at x when the data are drawn with mean Hx:
/// Gaussian sum_j x_j^2 (H_2^T sigma^2)_j, Poisson sum_j x_j^2 (H_2^T (1/Hx))_j.
double cbr_expected(const ImageVector& x, const ForwardOperator& op, const NoiseModel& noise);
double cbr_expected(const ImageVector& x, const Vector& forward, const ForwardOperator& op,
                    const NoiseModel& noise);

struct CbrTerms {
  double residual = 0.0;
  double expected = 0.0;
};

/// Both CBR quantities with one pass over H; bitwise equal to calling
/// cbr_residual and cbr_expected separately.
CbrTerms cbr_terms(const DataVector& y, const ImageVector& x, const Vector& forward,
                   const ForwardOperator& op, const NoiseModel& noise);

/// As above, and also returns H^T extra from the same sweep over H. Used by
/// the iteration driver to share one sweep between the rule and the next update.
CbrTerms cbr_terms(const DataVector& y, const ImageVector& x, const Vector& forward,
                   const ForwardOperator& op, const NoiseModel& noise, const Vector& extra,
                   Vector& extra_backprojected);

}  // namespace cbr
