#include "cbr/operators.hpp"

#include "cbr/errors.hpp"
#include "cbr/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace cbr {

namespace {

// Shared reduction kernels; every adjoint path goes through these.
inline double column_dot(const Matrix& h, Eigen::Index j, const Vector& v) {
  return h.col(j).dot(v);
}

inline double squared_column_dot(const Matrix& h, Eigen::Index j, const Vector& w) {
  return (h.col(j).array().square() * w.array()).sum();
}

}  // namespace

ForwardOperator::ForwardOperator(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw DimensionError("forward operator needs at least one row and one column");
  }
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      const double h = entries_(i, j);
      if (!(h > 0.0) || !std::isfinite(h)) {
        throw DomainError("operator entry (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") is not strictly positive");
      }
    }
  }
  const Vector ones = Vector::Ones(entries_.rows());
  column_sums_.resize(entries_.cols());
  squared_column_sums_.resize(entries_.cols());
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    column_sums_[j] = column_dot(entries_, j, ones);
    squared_column_sums_[j] = squared_column_dot(entries_, j, ones);
  }
}

void ForwardOperator::require_data_length(const Vector& v) const {
  if (v.size() != entries_.rows()) {
    throw DimensionError("expected a data-space vector of length " +
                         std::to_string(entries_.rows()) + ", got " + std::to_string(v.size()));
  }
}

Vector ForwardOperator::apply(const Vector& x) const {
  if (x.size() != entries_.cols()) {
    throw DimensionError("expected a parameter vector of length " +
                         std::to_string(entries_.cols()) + ", got " + std::to_string(x.size()));
  }
  Vector out(entries_.rows());
  out.noalias() = entries_ * x;
  return out;
}

Vector ForwardOperator::adjoint_apply(const Vector& v) const {
  require_data_length(v);
  Vector out(entries_.cols());
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) out[j] = column_dot(entries_, j, v);
  return out;
}

Vector ForwardOperator::squared_adjoint_apply(const Vector& v) const {
  require_data_length(v);
  Vector out(entries_.cols());
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) out[j] = squared_column_dot(entries_, j, v);
  return out;
}

std::pair<Vector, Vector> ForwardOperator::adjoint_pair(const Vector& v, const Vector& w) const {
  Sweep sweep = adjoint_sweep({&v}, &w);
  return {std::move(sweep.plain.front()), std::move(sweep.squared)};
}

ForwardOperator::Sweep ForwardOperator::adjoint_sweep(std::initializer_list<const Vector*> plain,
                                                      const Vector* squared) const {
  for (const Vector* v : plain) require_data_length(*v);
  if (squared) require_data_length(*squared);
  Sweep out;
  out.plain.assign(plain.size(), Vector(entries_.cols()));
  if (squared) out.squared.resize(entries_.cols());
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    std::size_t t = 0;
    for (const Vector* v : plain) out.plain[t++][j] = column_dot(entries_, j, *v);
    if (squared) out.squared[j] = squared_column_dot(entries_, j, *squared);
  }
  return out;
}

DataVector apply(const ForwardOperator& op, const ImageVector& x) {
  return DataVector(op.apply(x.values()));
}

ForwardOperator build_dense_positive(std::size_t n, std::size_t m, std::uint64_t seed,
                                     double floor) {
  if (!(floor > 0.0)) throw DomainError("floor must be > 0");
  if (n < 1 || m < 1) throw DimensionError("operator dimensions must be >= 1");
  CounterStream rng(seed, 0);
  Matrix h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  // Row-major draw order so the matrix does not depend on storage layout.
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = floor + rng.uniform();
  }
  return ForwardOperator(std::move(h));
}

ForwardOperator build_blur_operator(std::size_t rows, std::size_t cols, double psf_sigma,
                                    const BlurOptions& options) {
  if (rows < 1 || cols < 1) throw DimensionError("blur grid dimensions must be >= 1");
  if (!(psf_sigma > 0.0)) throw DomainError("psf_sigma must be > 0");
  if (!(options.floor > 0.0)) throw DomainError("floor must be > 0");
  if (!(options.gain > 0.0)) throw DomainError("gain must be > 0");

  // The kernel is separable; tabulate the 1D factors by pixel offset.
  const auto profile = [&](std::size_t extent) {
    std::vector<double> table(extent);
    for (std::size_t d = 0; d < extent; ++d) {
      double dist = static_cast<double>(d);
      if (options.boundary == Boundary::Periodic) {
        dist = std::min(dist, static_cast<double>(extent - d));
      }
      table[d] = std::exp(-dist * dist / (2.0 * psf_sigma * psf_sigma));
    }
    return table;
  };
  const std::vector<double> along_cols = profile(cols);
  const std::vector<double> along_rows = profile(rows);

  const auto n = static_cast<Eigen::Index>(rows * cols);
  Matrix h(n, n);
  for (std::size_t rj = 0; rj < rows; ++rj) {
    for (std::size_t cj = 0; cj < cols; ++cj) {
      const auto j = static_cast<Eigen::Index>(rj * cols + cj);
      for (std::size_t ri = 0; ri < rows; ++ri) {
        const double wr = along_rows[ri > rj ? ri - rj : rj - ri];
        for (std::size_t ci = 0; ci < cols; ++ci) {
          const double wc = along_cols[ci > cj ? ci - cj : cj - ci];
          h(static_cast<Eigen::Index>(ri * cols + ci), j) = options.gain * wr * wc + options.floor;
        }
      }
    }
  }
  return ForwardOperator(std::move(h));
}

}  // namespace cbr
