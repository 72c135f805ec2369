#pragma once

#include "cbr/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <utility>
#include <vector>

namespace cbr {

/// Dense linear forward model y = Hx with strictly positive entries.
///
/// Immutable after construction. Caches the column sums H^T 1 (used by the
/// EM update) and the squared column sums H_2^T 1, where H_2 is the
/// elementwise square of H.
///
/// Adjoint actions are evaluated column by column with the same reduction
/// kernel, so adjoint_apply / squared_adjoint_apply and the fused
/// adjoint_pair produce bitwise identical results.
class ForwardOperator {
 public:
  /// Throws DimensionError on an empty matrix and DomainError if any entry
  /// is not strictly positive.
  explicit ForwardOperator(Matrix entries);

  std::size_t n_data() const { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t n_params() const { return static_cast<std::size_t>(entries_.cols()); }
  const Matrix& entries() const { return entries_; }
  const Vector& column_sums() const { return column_sums_; }
  const Vector& squared_column_sums() const { return squared_column_sums_; }
  double min_entry() const { return entries_.minCoeff(); }

  /// H x
  Vector apply(const Vector& x) const;
  /// H^T v
  Vector adjoint_apply(const Vector& v) const;
  /// H_2^T v
  Vector squared_adjoint_apply(const Vector& v) const;
  /// (H^T v, H_2^T w) in a single sweep over the matrix.
  std::pair<Vector, Vector> adjoint_pair(const Vector& v, const Vector& w) const;

  struct Sweep {
    std::vector<Vector> plain;
    Vector squared;
  };
  /// H^T v for each v in `plain`, and H_2^T w if `squared` is given, reading
  /// every column once. Large operators are memory bound, so this costs
  /// about as much as a single adjoint_apply.
  Sweep adjoint_sweep(std::initializer_list<const Vector*> plain,
                      const Vector* squared = nullptr) const;

 private:
  void require_data_length(const Vector& v) const;

  Matrix entries_;
  Vector column_sums_;
  Vector squared_column_sums_;
};

DataVector apply(const ForwardOperator& op, const ImageVector& x);

/// Entries uniform on [floor, 1 + floor], drawn from CounterStream(seed, 0).
ForwardOperator build_dense_positive(std::size_t n, std::size_t m, std::uint64_t seed,
                                     double floor);

enum class Boundary { Truncated, Periodic };

struct BlurOptions {
  double floor = 1e-6;
  Boundary boundary = Boundary::Truncated;
  /// Response scale applied to the kernel (counts per unit intensity).
  double gain = 1.0;
};

/// Square blur operator on a rows x cols grid: entry (i, j) is
/// gain * exp(-|p_i - p_j|^2 / (2 psf_sigma^2)) + floor, where p_i is the
/// (col, row) position of pixel i. Periodic mode measures distances on the
/// torus.
ForwardOperator build_blur_operator(std::size_t rows, std::size_t cols, double psf_sigma,
                                    const BlurOptions& options = {});

}  // namespace cbr
