#include "cbr/config.hpp"

#include "cbr/errors.hpp"
#include "cbr/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace cbr {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item = trim(text.substr(start, comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

double to_double(std::string_view key, std::string_view value) {
  try {
    return io::parse_number(value);
  } catch (const Error&) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(value) + "'");
  }
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError(std::string(key),
                      "expected a nonnegative integer, got '" + std::string(value) + "'");
  }
  return out;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

int to_int(std::string_view key, std::string_view value) {
  const std::uint64_t v = to_u64(key, value);
  if (v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw ConfigError(std::string(key), "value too large");
  }
  return static_cast<int>(v);
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(value) + "'");
}

void set_source_field(GaussianSource& src, std::string_view key, std::string_view value) {
  if (key == "label") {
    src.label = std::string(value);
  } else if (key == "col") {
    src.col = to_double("source.col", value);
  } else if (key == "row") {
    src.row = to_double("source.row", value);
  } else if (key == "variance") {
    src.variance = to_double("source.variance", value);
  } else if (key == "amplitude") {
    src.amplitude = to_double("source.amplitude", value);
  } else {
    throw ConfigError("source." + std::string(key), "unknown key");
  }
}

struct PendingNoise {
  std::optional<std::string> kind;
  std::optional<double> sigma;
};

void set_top_field(ExperimentConfig& c, PendingNoise& noise, std::optional<std::size_t>& grid_rows,
                   std::optional<std::size_t>& grid_cols, std::string_view key,
                   std::string_view value) {
  const std::string k(key);
  if (key == "operator") {
    if (value == "blur") c.op.kind = OperatorKind::Blur;
    else if (value == "dense") c.op.kind = OperatorKind::Dense;
    else if (value == "file") c.op.kind = OperatorKind::File;
    else throw ConfigError(k, "expected blur, dense or file");
  } else if (key == "operator.rows") {
    c.op.rows = to_size(key, value);
  } else if (key == "operator.cols") {
    c.op.cols = to_size(key, value);
  } else if (key == "operator.psf_sigma") {
    c.op.psf_sigma = to_double(key, value);
  } else if (key == "operator.boundary") {
    if (value == "truncated") c.op.boundary = Boundary::Truncated;
    else if (value == "periodic") c.op.boundary = Boundary::Periodic;
    else throw ConfigError(k, "expected truncated or periodic");
  } else if (key == "operator.gain") {
    c.op.gain = to_double(key, value);
  } else if (key == "operator.floor") {
    c.op.floor = to_double(key, value);
  } else if (key == "operator.n") {
    c.op.n = to_size(key, value);
  } else if (key == "operator.m") {
    c.op.m = to_size(key, value);
  } else if (key == "operator.seed") {
    c.op.seed = to_u64(key, value);
  } else if (key == "operator.file") {
    c.op.file = std::string(value);
  } else if (key == "phantom.rows") {
    grid_rows = to_size(key, value);
  } else if (key == "phantom.cols") {
    grid_cols = to_size(key, value);
  } else if (key == "noise") {
    if (value != "gaussian" && value != "poisson") throw ConfigError(k, "expected gaussian or poisson");
    noise.kind = std::string(value);
  } else if (key == "noise.sigma") {
    noise.sigma = to_double(key, value);
  } else if (key == "noise.total_counts") {
    c.total_counts = to_double(key, value);
  } else if (key == "seeds") {
    try {
      c.seeds = parse_seed_list(value);
    } catch (const ConfigError& e) {
      throw ConfigError(k, e.message());
    }
  } else if (key == "solver") {
    c.solver = parse_solver_kind(value);
    if (!c.solver) throw ConfigError(k, "expected isra or em");
  } else if (key == "rules") {
    c.rules = parse_rule_list(value);
  } else if (key == "tau") {
    if (value == "default") c.tau.reset();
    else c.tau = to_double(key, value);
  } else if (key == "max_iter") {
    c.max_iter = to_int(key, value);
  } else if (key == "out") {
    c.out = std::string(value);
  } else if (key == "data.dir") {
    c.data_dir = std::string(value);
  } else if (key == "data.file") {
    c.data_file = std::string(value);
  } else if (key == "truth.file") {
    c.truth_file = std::string(value);
  } else if (key == "fail_on_no_stop") {
    c.fail_on_no_stop = to_bool(key, value);
  } else if (key == "sweep.levels") {
    c.sweep_levels.clear();
    for (const auto item : split_list(value)) c.sweep_levels.push_back(to_double(key, item));
  } else if (key == "photometry.box_side") {
    c.box_side = to_int(key, value);
  } else {
    throw ConfigError(k, "unknown key");
  }
}

}  // namespace

SolverKind ExperimentConfig::resolved_solver() const {
  if (solver) return *solver;
  return noise.is_gaussian() ? SolverKind::Isra : SolverKind::Em;
}

PhantomSpec ExperimentConfig::phantom_spec() const {
  if (sources.empty()) throw ConfigError("source", "at least one [source] block is required");
  GridShape grid;
  if (phantom_grid) {
    grid = *phantom_grid;
  } else if (op.kind == OperatorKind::Blur) {
    grid = {op.rows, op.cols};
  } else {
    throw ConfigError("phantom.rows", "phantom grid must be given for non-blur operators");
  }
  PhantomSpec spec{grid.rows, grid.cols, sources};
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError("source", e.what());
  }
  return spec;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (const auto item : split_list(text)) seeds.push_back(to_u64("seeds", item));
  if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  return seeds;
}

std::vector<RuleKind> parse_rule_list(std::string_view text) {
  std::vector<RuleKind> rules;
  for (const auto item : split_list(text)) {
    const auto kind = parse_rule_kind(item);
    if (!kind) throw ConfigError("rules", "unknown rule '" + std::string(item) + "'");
    rules.push_back(*kind);
  }
  return rules;
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  PendingNoise noise;
  std::optional<std::size_t> grid_rows, grid_cols;
  bool in_source = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::string where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line != "[source]") throw ConfigError(std::string(line), "unknown section" + where);
      c.sources.emplace_back();
      in_source = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("", "expected 'key = value'" + where);
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (in_source) {
        set_source_field(c.sources.back(), key, value);
      } else {
        set_top_field(c, noise, grid_rows, grid_cols, key, value);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(e.field(), e.message() + where);
    }
  }

  if (grid_rows || grid_cols) {
    if (!grid_rows || !grid_cols) {
      throw ConfigError("phantom.rows", "phantom.rows and phantom.cols must be given together");
    }
    c.phantom_grid = GridShape{*grid_rows, *grid_cols};
  }
  if (noise.kind == std::optional<std::string>("gaussian")) {
    if (!noise.sigma) throw ConfigError("noise.sigma", "required for gaussian noise");
    try {
      c.noise = NoiseModel::gaussian(*noise.sigma);
    } catch (const DomainError& e) {
      throw ConfigError("noise.sigma", e.what());
    }
  } else {
    c.noise = NoiseModel::poisson();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(text);
}

std::string format_config(const ExperimentConfig& c) {
  using io::format_number;
  std::string out;
  const auto line = [&out](std::string_view key, const std::string& value) {
    out += std::string(key) + " = " + value + "\n";
  };
  switch (c.op.kind) {
    case OperatorKind::Blur:
      line("operator", "blur");
      line("operator.rows", std::to_string(c.op.rows));
      line("operator.cols", std::to_string(c.op.cols));
      line("operator.psf_sigma", format_number(c.op.psf_sigma));
      line("operator.boundary", c.op.boundary == Boundary::Periodic ? "periodic" : "truncated");
      line("operator.gain", format_number(c.op.gain));
      line("operator.floor", format_number(c.op.floor));
      break;
    case OperatorKind::Dense:
      line("operator", "dense");
      line("operator.n", std::to_string(c.op.n));
      line("operator.m", std::to_string(c.op.m));
      line("operator.seed", std::to_string(c.op.seed));
      line("operator.floor", format_number(c.op.floor));
      break;
    case OperatorKind::File:
      line("operator", "file");
      line("operator.file", c.op.file.string());
      break;
  }
  if (c.phantom_grid) {
    line("phantom.rows", std::to_string(c.phantom_grid->rows));
    line("phantom.cols", std::to_string(c.phantom_grid->cols));
  }
  line("noise", c.noise.name());
  if (c.noise.is_gaussian()) line("noise.sigma", format_number(c.noise.sigma()));
  if (c.total_counts) line("noise.total_counts", format_number(*c.total_counts));
  std::string seeds;
  for (const auto s : c.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  line("seeds", seeds);
  line("solver", std::string(to_string(c.resolved_solver())));
  std::string rules;
  for (const auto r : c.rules) rules += (rules.empty() ? "" : ",") + std::string(to_string(r));
  if (!rules.empty()) line("rules", rules);
  line("tau", c.tau ? format_number(*c.tau) : "default");
  line("max_iter", std::to_string(c.max_iter));
  line("out", c.out.string());
  if (c.data_dir) line("data.dir", c.data_dir->string());
  if (c.data_file) line("data.file", c.data_file->string());
  if (c.truth_file) line("truth.file", c.truth_file->string());
  line("fail_on_no_stop", c.fail_on_no_stop ? "true" : "false");
  if (!c.sweep_levels.empty()) {
    std::string levels;
    for (const auto v : c.sweep_levels) levels += (levels.empty() ? "" : ",") + format_number(v);
    line("sweep.levels", levels);
  }
  line("photometry.box_side", std::to_string(c.box_side));
  for (const auto& s : c.sources) {
    out += "\n[source]\n";
    if (!s.label.empty()) line("label", s.label);
    line("col", format_number(s.col));
    line("row", format_number(s.row));
    line("variance", format_number(s.variance));
    line("amplitude", format_number(s.amplitude));
  }
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
  if (c.max_iter < 1) throw ConfigError("max_iter", "must be >= 1");
  if (c.box_side < 1 || c.box_side % 2 == 0) {
    throw ConfigError("photometry.box_side", "must be a positive odd number");
  }
  if (c.tau && !(*c.tau > 0.0)) throw ConfigError("tau", "must be > 0 or 'default'");
  const SolverKind solver = c.resolved_solver();
  if (!solver_matches(solver, c.noise)) {
    throw ConfigError("solver", std::string(to_string(solver)) + " cannot be paired with " +
                                    c.noise.name() + " noise");
  }
  for (const auto kind : c.rules) {
    const bool ok = kind == RuleKind::L2Oracle ||
                    StoppingRule(kind, 1.0).compatible_with(c.noise);
    if (!ok) {
      throw ConfigError("rules", std::string(to_string(kind)) + " cannot be used with " +
                                     c.noise.name() + " noise");
    }
  }
  if (c.total_counts && !(*c.total_counts > 0.0)) {
    throw ConfigError("noise.total_counts", "must be > 0");
  }
  switch (c.op.kind) {
    case OperatorKind::Blur:
      if (c.op.rows < 1 || c.op.cols < 1) throw ConfigError("operator.rows", "blur grid must be >= 1");
      if (!(c.op.psf_sigma > 0.0)) throw ConfigError("operator.psf_sigma", "must be > 0");
      if (!(c.op.gain > 0.0)) throw ConfigError("operator.gain", "must be > 0");
      if (!(c.op.floor > 0.0)) throw ConfigError("operator.floor", "must be > 0");
      break;
    case OperatorKind::Dense:
      if (c.op.n < 1 || c.op.m < 1) throw ConfigError("operator.n", "dimensions must be >= 1");
      if (!(c.op.floor > 0.0)) throw ConfigError("operator.floor", "must be > 0");
      break;
    case OperatorKind::File:
      if (c.op.file.empty()) throw ConfigError("operator.file", "path required");
      break;
  }
}

ForwardOperator build_operator(const OperatorConfig& config) {
  switch (config.kind) {
    case OperatorKind::Blur:
      return build_blur_operator(config.rows, config.cols, config.psf_sigma,
                                 {config.floor, config.boundary, config.gain});
    case OperatorKind::Dense:
      return build_dense_positive(config.n, config.m, config.seed, config.floor);
    case OperatorKind::File:
      return io::read_operator_csv(config.file);
  }
  throw ConfigError("operator", "unknown operator kind");
}

}  // namespace cbr
