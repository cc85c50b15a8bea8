#include "noisevar/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "noisevar/error.hpp"

namespace noisevar {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::size_t parse_size(std::string_view text, std::string_view context) {
  std::size_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorKind::InvalidArgument,
                "invalid lag '" + std::string(text) + "' in '" + std::string(context) + "'");
  }
  return value;
}

}  // namespace

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns)
    : names_(std::move(names)), columns_(std::move(columns)) {
  if (names_.size() != columns_.size()) {
    throw Error(ErrorKind::InvalidArgument, "dataset: name count does not match column count");
  }
  if (columns_.empty()) throw Error(ErrorKind::Data, "dataset: no columns");
  std::set<std::string, std::less<>> seen;
  const std::size_t n = columns_.front().size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (names_[c].empty()) throw Error(ErrorKind::Data, "dataset: empty column name");
    if (!seen.insert(names_[c]).second) {
      throw Error(ErrorKind::Data, "dataset: duplicate column name '" + names_[c] + "'");
    }
    if (columns_[c].size() != n) {
      throw Error(ErrorKind::Data, "dataset: column '" + names_[c] + "' has length " +
                                       std::to_string(columns_[c].size()) + ", expected " +
                                       std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(columns_[c][i])) {
        throw Error(ErrorKind::Data, "dataset: non-finite value in column '" + names_[c] +
                                         "' at row " + std::to_string(i + 1));
      }
    }
  }
  if (n < 2) throw Error(ErrorKind::Data, "dataset: need at least 2 rows, got " + std::to_string(n));
}

std::span<const double> Dataset::column(std::size_t index) const {
  if (index >= columns_.size()) throw Error(ErrorKind::InvalidArgument, "dataset: column index out of range");
  return columns_[index];
}

std::span<const double> Dataset::column(std::string_view name) const {
  const auto idx = find(name);
  if (!idx) throw Error(ErrorKind::InvalidArgument, "dataset: no column named '" + std::string(name) + "'");
  return columns_[*idx];
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
  for (std::size_t c = 0; c < names_.size(); ++c) {
    if (names_[c] == name) return c;
  }
  return std::nullopt;
}

std::vector<double> RegressionProblem::x_column(std::size_t col) const {
  std::vector<double> out(rows());
  for (std::size_t i = 0; i < rows(); ++i) out[i] = at(i, col);
  return out;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size());
}

RegressionProblem make_problem(std::vector<double> y, std::vector<double> x_row_major,
                               std::size_t d, std::string y_name,
                               std::vector<std::string> x_names) {
  const std::size_t n = y.size();
  if (n < 2) throw Error(ErrorKind::Data, "problem: need at least 2 rows, got " + std::to_string(n));
  if (x_row_major.size() != n * d) throw Error(ErrorKind::InvalidArgument, "problem: X shape does not match N x d");
  if (x_names.empty()) {
    for (std::size_t k = 0; k < d; ++k) x_names.push_back("x" + std::to_string(k + 1));
  }
  if (x_names.size() != d) throw Error(ErrorKind::InvalidArgument, "problem: X name count does not match d");
  RegressionProblem p;
  p.y = std::move(y);
  p.x = std::move(x_row_major);
  p.d = d;
  p.y_name = std::move(y_name);
  p.x_names = std::move(x_names);
  p.sigma_y = std::sqrt(variance(p.y));
  if (!(p.sigma_y > 0.0)) throw Error(ErrorKind::Data, "problem: target '" + p.y_name + "' is constant");
  p.x_mean.assign(d, 0.0);
  p.x_scale.assign(d, 1.0);
  return p;
}

std::string VarRef::label() const {
  return lag == 0 ? name : name + "@" + std::to_string(lag);
}

VarRef parse_var(std::string_view text) {
  text = trim(text);
  const auto at = text.find('@');
  VarRef ref;
  ref.name = std::string(trim(text.substr(0, at)));
  if (ref.name.empty()) throw Error(ErrorKind::InvalidArgument, "empty variable name in '" + std::string(text) + "'");
  if (at != std::string_view::npos) ref.lag = parse_size(trim(text.substr(at + 1)), text);
  return ref;
}

std::vector<VarRef> parse_var_list(std::string_view text) {
  std::vector<VarRef> out;
  text = trim(text);
  if (text.empty() || text == "none" || text == "{none}") return out;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw Error(ErrorKind::InvalidArgument, "empty entry in variable list '" + std::string(text) + "'");
    const auto at = item.find('@');
    const auto dots = item.find("..");
    if (at != std::string_view::npos && dots != std::string_view::npos && dots > at) {
      const std::string name(trim(item.substr(0, at)));
      const auto lo = parse_size(trim(item.substr(at + 1, dots - at - 1)), item);
      const auto hi = parse_size(trim(item.substr(dots + 2)), item);
      if (name.empty() || lo > hi) throw Error(ErrorKind::InvalidArgument, "bad lag range '" + std::string(item) + "'");
      for (auto k = lo; k <= hi; ++k) out.push_back({name, k});
    } else {
      out.push_back(parse_var(item));
    }
  }
  return out;
}

RegressionProblem build_problem(const Dataset& data, const VarRef& target,
                                std::span<const VarRef> vars, std::size_t min_offset) {
  const std::size_t n = data.rows();
  std::size_t max_lag = target.lag;
  for (const auto& v : vars) {
    if (!data.find(v.name)) throw Error(ErrorKind::InvalidArgument, "no column named '" + v.name + "'");
    if (v.name == target.name && v.lag == target.lag) {
      throw Error(ErrorKind::InvalidArgument, "target '" + target.label() + "' cannot explain itself");
    }
    max_lag = std::max(max_lag, v.lag);
  }
  if (!data.find(target.name)) throw Error(ErrorKind::InvalidArgument, "no column named '" + target.name + "'");
  const std::size_t offset = std::max(max_lag, min_offset);
  if (offset >= n) {
    throw Error(ErrorKind::Data, "maximum lag " + std::to_string(offset) + " leaves no rows (N=" +
                                     std::to_string(n) + ")");
  }
  const std::size_t rows = n - offset;
  if (rows < 2) throw Error(ErrorKind::Data, "lagged problem has fewer than 2 rows");

  const auto ycol = data.column(target.name);
  std::vector<double> y(rows);
  for (std::size_t r = 0; r < rows; ++r) y[r] = ycol[offset + r - target.lag];

  const std::size_t d = vars.size();
  std::vector<double> x(rows * d);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < d; ++k) {
    const auto col = data.column(vars[k].name);
    for (std::size_t r = 0; r < rows; ++r) x[r * d + k] = col[offset + r - vars[k].lag];
    names.push_back(vars[k].label());
  }
  return make_problem(std::move(y), std::move(x), d, target.label(), std::move(names));
}

RegressionProblem build_lag_problem(const Dataset& series, const EmbeddingSpec& spec) {
  for (std::size_t i = 0; i < spec.lags.size(); ++i) {
    if (spec.lags[i] < 1) throw Error(ErrorKind::InvalidArgument, "embedding lags must be >= 1");
    if (i > 0 && spec.lags[i] <= spec.lags[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "embedding lags must be strictly increasing");
    }
  }
  std::vector<VarRef> vars;
  for (auto k : spec.lags) vars.push_back({spec.target, k});
  vars.insert(vars.end(), spec.extra_columns.begin(), spec.extra_columns.end());
  return build_problem(series, {spec.target, spec.target_lag}, vars);
}

RegressionProblem standardize(const RegressionProblem& problem) {
  RegressionProblem out = problem;
  const std::size_t n = problem.rows();
  const double my = mean(problem.y);
  const double sy = std::sqrt(variance(problem.y));
  if (!(sy > 0.0)) throw Error(ErrorKind::Data, "standardize: column '" + problem.y_name + "' has zero variance");
  for (std::size_t i = 0; i < n; ++i) out.y[i] = (problem.y[i] - my) / sy;
  out.y_mean = problem.y_mean + my * problem.y_scale;
  out.y_scale = problem.y_scale * sy;
  for (std::size_t k = 0; k < problem.d; ++k) {
    const auto col = problem.x_column(k);
    const double m = mean(col);
    const double s = std::sqrt(variance(col));
    if (!(s > 0.0)) {
      throw Error(ErrorKind::Data, "standardize: column '" + problem.x_names[k] + "' has zero variance");
    }
    for (std::size_t i = 0; i < n; ++i) out.x[i * problem.d + k] = (col[i] - m) / s;
    out.x_mean[k] = problem.x_mean[k] + m * problem.x_scale[k];
    out.x_scale[k] = problem.x_scale[k] * s;
  }
  out.sigma_y = std::sqrt(variance(out.y));
  out.standardized = true;
  return out;
}

Dataset parse_csv(std::string_view text, std::string_view source) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      start = end + 1;
    }
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  const std::string where(source);
  if (lines.empty()) throw Error(ErrorKind::Parse, where + ": empty file (header row required)");

  std::vector<std::string> names;
  for (auto h : split(lines.front(), ',')) names.emplace_back(h);
  std::vector<std::vector<double>> columns(names.size());

  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (trim(lines[r]).empty()) {
      throw Error(ErrorKind::Parse, where + ": blank line at row " + std::to_string(r + 1));
    }
    const auto cells = split(lines[r], ',');
    if (cells.size() != names.size()) {
      throw Error(ErrorKind::Parse, where + ": row " + std::to_string(r + 1) + " has " +
                                        std::to_string(cells.size()) + " fields, header has " +
                                        std::to_string(names.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      double value = 0.0;
      const char* begin = cell.data();
      const char* end = begin + cell.size();
      if (begin != end && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      const auto where_cell = where + ": row " + std::to_string(r + 1) + ", column " +
                              std::to_string(c + 1) + " ('" + names[c] + "')";
      if (ec != std::errc() || ptr != end || cell.empty()) {
        throw Error(ErrorKind::Parse, where_cell + ": cannot parse '" + std::string(cell) + "' as a number");
      }
      if (!std::isfinite(value)) {
        throw Error(ErrorKind::Parse, where_cell + ": non-finite value '" + std::string(cell) + "'");
      }
      columns[c].push_back(value);
    }
  }
  try {
    return Dataset(std::move(names), std::move(columns));
  } catch (const Error& e) {
    throw Error(e.kind(), where + ": " + e.what());
  }
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.string());
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double round_significant(double v, int digits) {
  if (digits <= 0 || v == 0.0 || !std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

std::string format_number(double v, int digits) {
  if (digits <= 0) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string format_csv(const Dataset& data) {
  std::string out;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    if (c) out += ',';
    out += data.names()[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      out += format_double(data.column(c)[r]);
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << format_csv(data);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace noisevar
