#pragma once

#include "cbr/evaluation.hpp"
#include "cbr/operators.hpp"
#include "cbr/stopping.hpp"
#include "cbr/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cbr::io {

namespace fs = std::filesystem;

/// Shortest decimal representation that round-trips to the same double.
std::string format_number(double value);
/// Strict parse of a whole field; throws Error on trailing garbage.
double parse_number(std::string_view text);

std::string read_text_file(const fs::path& path);
/// Writes with LF line endings; throws Error if the file cannot be written.
void write_text_file(const fs::path& path, std::string_view contents);

/// Splits CSV text into trimmed fields per nonempty line.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// First line "N,M", then N rows of M comma-separated entries.
void write_operator_csv(const fs::path& path, const ForwardOperator& op);
ForwardOperator read_operator_csv(const fs::path& path);

/// Header "col,row,value" for shaped images, "index,value" otherwise.
void write_image_csv(const fs::path& path, const ImageVector& img);
ImageVector read_image_csv(const fs::path& path);

/// Header "index,value".
void write_data_csv(const fs::path& path, const DataVector& data);
DataVector read_data_csv(const fs::path& path);

/// Header "k,lhs,rhs,fired".
void write_trace_csv(const fs::path& path, const RuleTrace& trace);
RuleTrace read_trace_csv(const fs::path& path);

/// Header "source,flux,rule_flux,ratio_percent".
void write_photometry_csv(const fs::path& path, const PhotometryReport& report);

/// 8-bit binary portable graymap, min-max normalized, top row first.
void write_pgm(const fs::path& path, const ImageVector& img);

}  // namespace cbr::io
