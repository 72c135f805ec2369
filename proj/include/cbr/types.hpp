#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace cbr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Pixel grid of an image. Pixel (col, row) is stored at row * cols + col,
/// with row 0 at the bottom of the picture.
struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  std::size_t index(std::size_t col, std::size_t row) const { return row * cols + col; }
  bool operator==(const GridShape&) const = default;
};

/// Nonnegative parameter vector x, optionally carrying a 2D grid shape.
class ImageVector {
 public:
  ImageVector() = default;
  explicit ImageVector(Vector values, std::optional<GridShape> shape = std::nullopt);

  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const std::optional<GridShape>& shape() const { return shape_; }
  double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }

  /// Pixel value at (col, row); requires a shape.
  double at(std::size_t col, std::size_t row) const;

  ImageVector scaled(double factor) const;
  ImageVector with_shape(std::optional<GridShape> shape) const;

 private:
  Vector values_;
  std::optional<GridShape> shape_;
};

/// Observation vector y. Gaussian data may be negative, so no sign
/// constraint is imposed here; Poisson solvers check it on entry.
class DataVector {
 public:
  DataVector() = default;
  explicit DataVector(Vector values);

  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double sum() const { return values_.sum(); }
  bool nonnegative() const { return (values_.array() >= 0.0).all(); }

 private:
  Vector values_;
};

}  // namespace cbr
