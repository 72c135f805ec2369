#pragma once

#include "cbr/simkit.hpp"
#include "cbr/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace cbr {

struct PixelCenter {
  double col = 0.0;
  double row = 0.0;
};

/// Sum of the side x side box centered on the rounded center, clipped to
/// the grid. Throws DomainError for an even or nonpositive side or an
/// image without shape.
double box_flux(const ImageVector& img, PixelCenter center, int side);

struct PhotometryRecord {
  std::string label;
  double true_flux = 0.0;
  double reconstructed_flux = 0.0;
  /// 100 * reconstructed / true; NaN when the true flux is zero.
  double ratio_percent = 0.0;
};

struct PhotometryReport {
  std::vector<PhotometryRecord> records;
  int box_side = 13;
};

PhotometryReport photometry(const ImageVector& truth, const ImageVector& recon,
                            const PhantomSpec& spec, int side = 13);

double l2_distance(const ImageVector& a, const ImageVector& b);

/// ||x^(k) - truth|| for each snapshot, in order.
std::vector<double> l2_error_trace(std::span<const ImageVector> snapshots,
                                   const ImageVector& truth);

/// Index of the smallest entry (first one on ties).
std::size_t argmin(std::span<const double> values);

}  // namespace cbr
