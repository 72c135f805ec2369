#include "cbr/io.hpp"

#include "cbr/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cbr::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::size_t parse_size(std::string_view text, const fs::path& path) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(path.string() + ": expected a nonnegative integer, got '" + std::string(text) + "'");
  }
  return value;
}

void require_header(const std::vector<std::vector<std::string>>& rows,
                    const std::vector<std::string>& header, const fs::path& path) {
  if (rows.empty() || rows.front() != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw Error(path.string() + ": expected header '" + expected + "'");
  }
}

void require_fields(const std::vector<std::string>& row, std::size_t count, const fs::path& path) {
  if (row.size() != count) {
    throw Error(path.string() + ": expected " + std::to_string(count) + " fields per row");
  }
}

}  // namespace

std::string format_number(double value) { return fmt::format("{}", value); }

double parse_number(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    if (!line.empty()) {
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      rows.push_back(std::move(fields));
    }
    pos = end + 1;
  }
  return rows;
}

void write_operator_csv(const fs::path& path, const ForwardOperator& op) {
  const Matrix& h = op.entries();
  std::string out = fmt::format("{},{}\n", h.rows(), h.cols());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_number(h(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

ForwardOperator read_operator_csv(const fs::path& path) {
  const auto rows = parse_csv(read_text_file(path));
  if (rows.empty()) throw Error(path.string() + ": empty operator file");
  require_fields(rows.front(), 2, path);
  const std::size_t n = parse_size(rows.front()[0], path);
  const std::size_t m = parse_size(rows.front()[1], path);
  if (rows.size() != n + 1) {
    throw Error(path.string() + ": header declares " + std::to_string(n) + " rows, found " +
                std::to_string(rows.size() - 1));
  }
  Matrix h(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    require_fields(rows[i + 1], m, path);
    for (std::size_t j = 0; j < m; ++j) {
      h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_number(rows[i + 1][j]);
    }
  }
  return ForwardOperator(std::move(h));
}

void write_image_csv(const fs::path& path, const ImageVector& img) {
  std::string out;
  if (img.shape()) {
    out = "col,row,value\n";
    const GridShape s = *img.shape();
    for (std::size_t r = 0; r < s.rows; ++r) {
      for (std::size_t c = 0; c < s.cols; ++c) {
        out += fmt::format("{},{},{}\n", c, r, format_number(img.at(c, r)));
      }
    }
  } else {
    out = "index,value\n";
    for (std::size_t j = 0; j < img.size(); ++j) {
      out += fmt::format("{},{}\n", j, format_number(img[j]));
    }
  }
  write_text_file(path, out);
}

ImageVector read_image_csv(const fs::path& path) {
  const auto rows = parse_csv(read_text_file(path));
  if (!rows.empty() && rows.front().size() == 2) {
    require_header(rows, {"index", "value"}, path);
    Vector values(static_cast<Eigen::Index>(rows.size() - 1));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      require_fields(rows[r], 2, path);
      if (parse_size(rows[r][0], path) != r - 1) throw Error(path.string() + ": indices out of order");
      values[static_cast<Eigen::Index>(r - 1)] = parse_number(rows[r][1]);
    }
    return ImageVector(std::move(values));
  }
  require_header(rows, {"col", "row", "value"}, path);
  std::size_t max_col = 0, max_row = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require_fields(rows[r], 3, path);
    max_col = std::max(max_col, parse_size(rows[r][0], path));
    max_row = std::max(max_row, parse_size(rows[r][1], path));
  }
  const GridShape shape{max_row + 1, max_col + 1};
  if (rows.size() - 1 != shape.size()) throw Error(path.string() + ": image grid is incomplete");
  Vector values = Vector::Constant(static_cast<Eigen::Index>(shape.size()), -1.0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t idx = shape.index(parse_size(rows[r][0], path), parse_size(rows[r][1], path));
    values[static_cast<Eigen::Index>(idx)] = parse_number(rows[r][2]);
  }
  return ImageVector(std::move(values), shape);
}

void write_data_csv(const fs::path& path, const DataVector& data) {
  std::string out = "index,value\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += fmt::format("{},{}\n", i, format_number(data[i]));
  }
  write_text_file(path, out);
}

DataVector read_data_csv(const fs::path& path) {
  const auto rows = parse_csv(read_text_file(path));
  require_header(rows, {"index", "value"}, path);
  Vector values(static_cast<Eigen::Index>(rows.size() - 1));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require_fields(rows[r], 2, path);
    if (parse_size(rows[r][0], path) != r - 1) throw Error(path.string() + ": indices out of order");
    values[static_cast<Eigen::Index>(r - 1)] = parse_number(rows[r][1]);
  }
  return DataVector(std::move(values));
}

void write_trace_csv(const fs::path& path, const RuleTrace& trace) {
  std::string out = "k,lhs,rhs,fired\n";
  for (const auto& r : trace.records) {
    out += fmt::format("{},{},{},{}\n", r.k, format_number(r.lhs), format_number(r.rhs),
                       r.fired ? 1 : 0);
  }
  write_text_file(path, out);
}

RuleTrace read_trace_csv(const fs::path& path) {
  const auto rows = parse_csv(read_text_file(path));
  require_header(rows, {"k", "lhs", "rhs", "fired"}, path);
  RuleTrace trace;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    require_fields(rows[r], 4, path);
    const std::size_t fired = parse_size(rows[r][3], path);
    if (fired > 1) throw Error(path.string() + ": fired column must be 0 or 1");
    trace.records.push_back({static_cast<int>(parse_size(rows[r][0], path)),
                             parse_number(rows[r][1]), parse_number(rows[r][2]), fired == 1});
  }
  return trace;
}

void write_photometry_csv(const fs::path& path, const PhotometryReport& report) {
  std::string out = "source,flux,rule_flux,ratio_percent\n";
  for (const auto& r : report.records) {
    out += fmt::format("{},{},{},{}\n", r.label, format_number(r.true_flux),
                       format_number(r.reconstructed_flux), format_number(r.ratio_percent));
  }
  write_text_file(path, out);
}

void write_pgm(const fs::path& path, const ImageVector& img) {
  if (!img.shape()) throw DomainError("PGM export needs an image with a grid shape");
  const GridShape s = *img.shape();
  const double lo = img.values().minCoeff();
  const double hi = img.values().maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::string out = fmt::format("P5\n{} {}\n255\n", s.cols, s.rows);
  for (std::size_t r = s.rows; r-- > 0;) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      const double level = std::round(255.0 * (img.at(c, r) - lo) / span);
      out += static_cast<char>(static_cast<unsigned char>(std::clamp(level, 0.0, 255.0)));
    }
  }
  write_text_file(path, out);
}

}  // namespace cbr::io
