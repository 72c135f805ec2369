#include "cbr/types.hpp"

#include "cbr/errors.hpp"

#include <cmath>
#include <string>

namespace cbr {

ImageVector::ImageVector(Vector values, std::optional<GridShape> shape)
    : values_(std::move(values)), shape_(shape) {
  if (shape_ && shape_->size() != size()) {
    throw DimensionError("image shape " + std::to_string(shape_->rows) + "x" +
                         std::to_string(shape_->cols) + " does not match length " +
                         std::to_string(size()));
  }
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    if (!(values_[j] >= 0.0) || !std::isfinite(values_[j])) {
      throw DomainError("image component " + std::to_string(j) +
                        " is negative or not finite");
    }
  }
}

double ImageVector::at(std::size_t col, std::size_t row) const {
  if (!shape_) throw DomainError("image has no grid shape");
  if (col >= shape_->cols || row >= shape_->rows) throw DimensionError("pixel outside grid");
  return values_[static_cast<Eigen::Index>(shape_->index(col, row))];
}

ImageVector ImageVector::scaled(double factor) const {
  return ImageVector(values_ * factor, shape_);
}

ImageVector ImageVector::with_shape(std::optional<GridShape> shape) const {
  return ImageVector(values_, shape);
}

DataVector::DataVector(Vector values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DomainError("data component " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace cbr
