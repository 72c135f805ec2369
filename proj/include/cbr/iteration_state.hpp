#pragma once

#include "cbr/operators.hpp"
#include "cbr/types.hpp"

namespace cbr {

/// Iterate x^(k) together with its cached image Hx^(k).
struct IterationState {
  ImageVector iterate;
  int k = 0;
  Vector forward;

  static IterationState start(const ForwardOperator& op, ImageVector x0) {
    Vector forward = op.apply(x0.values());
    return IterationState{std::move(x0), 0, std::move(forward)};
  }
};

}  // namespace cbr
