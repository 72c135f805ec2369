#include "cbr/evaluation.hpp"

#include "cbr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cbr {

double box_flux(const ImageVector& img, PixelCenter center, int side) {
  if (!img.shape()) throw DomainError("box_flux needs an image with a grid shape");
  if (side < 1 || side % 2 == 0) throw DomainError("box side must be a positive odd number");
  const GridShape shape = *img.shape();
  const long half = side / 2;
  const long c0 = std::lround(center.col);
  const long r0 = std::lround(center.row);
  const long c_lo = std::max(0L, c0 - half);
  const long c_hi = std::min(static_cast<long>(shape.cols) - 1, c0 + half);
  const long r_lo = std::max(0L, r0 - half);
  const long r_hi = std::min(static_cast<long>(shape.rows) - 1, r0 + half);
  double total = 0.0;
  for (long r = r_lo; r <= r_hi; ++r) {
    for (long c = c_lo; c <= c_hi; ++c) {
      total += img.at(static_cast<std::size_t>(c), static_cast<std::size_t>(r));
    }
  }
  return total;
}

PhotometryReport photometry(const ImageVector& truth, const ImageVector& recon,
                            const PhantomSpec& spec, int side) {
  if (!truth.shape() || !recon.shape() || *truth.shape() != *recon.shape()) {
    throw DimensionError("photometry needs truth and reconstruction with the same grid shape");
  }
  PhotometryReport report;
  report.box_side = side;
  for (std::size_t s = 0; s < spec.sources.size(); ++s) {
    const auto& src = spec.sources[s];
    PhotometryRecord rec;
    rec.label = src.label.empty() ? std::to_string(s) : src.label;
    rec.true_flux = box_flux(truth, {src.col, src.row}, side);
    rec.reconstructed_flux = box_flux(recon, {src.col, src.row}, side);
    rec.ratio_percent = rec.true_flux > 0.0 ? 100.0 * rec.reconstructed_flux / rec.true_flux
                                            : std::numeric_limits<double>::quiet_NaN();
    report.records.push_back(std::move(rec));
  }
  return report;
}

double l2_distance(const ImageVector& a, const ImageVector& b) {
  if (a.size() != b.size()) throw DimensionError("l2_distance: length mismatch");
  return (a.values() - b.values()).norm();
}

std::vector<double> l2_error_trace(std::span<const ImageVector> snapshots,
                                   const ImageVector& truth) {
  std::vector<double> out;
  out.reserve(snapshots.size());
  for (const auto& x : snapshots) out.push_back(l2_distance(x, truth));
  return out;
}

std::size_t argmin(std::span<const double> values) {
  if (values.empty()) throw DomainError("argmin of an empty sequence");
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) -
                                  values.begin());
}

}  // namespace cbr
