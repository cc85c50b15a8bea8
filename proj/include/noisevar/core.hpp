#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace noisevar {

/// Named numeric columns of equal length.
///
/// Construction validates that every column has the same length N >= 2, that
/// names are unique and non-empty, and that all values are finite.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns);

  std::size_t rows() const noexcept { return columns_.empty() ? 0 : columns_.front().size(); }
  std::size_t cols() const noexcept { return columns_.size(); }

  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const double> column(std::size_t index) const;
  std::span<const double> column(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

/// y = F(X) + r with X stored row-major (rows() x dims()).
///
/// `y_mean`/`y_scale` and `x_mean`/`x_scale` describe the affine map from the
/// original units to the current ones (identity until standardize() runs).
struct RegressionProblem {
  std::vector<double> y;
  std::vector<double> x;  // row-major, rows() * dims()
  std::size_t d = 0;
  std::string y_name;
  std::vector<std::string> x_names;
  double sigma_y = 0.0;  // population standard deviation of y

  double y_mean = 0.0;
  double y_scale = 1.0;
  std::vector<double> x_mean;
  std::vector<double> x_scale;
  bool standardized = false;

  std::size_t rows() const noexcept { return y.size(); }
  std::size_t dims() const noexcept { return d; }
  double at(std::size_t row, std::size_t col) const noexcept { return x[row * d + col]; }
  std::vector<double> x_column(std::size_t col) const;
};

/// Builds a problem and checks its invariants (N >= 2, sigma_y > 0, shapes).
RegressionProblem make_problem(std::vector<double> y, std::vector<double> x_row_major,
                               std::size_t d, std::string y_name = "y",
                               std::vector<std::string> x_names = {});

/// A column reference `name@lag`: the value of column `name` at time t - lag.
struct VarRef {
  std::string name;
  std::size_t lag = 0;

  std::string label() const;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

/// Parses "name" or "name@lag".
VarRef parse_var(std::string_view text);

/// Parses a comma-separated list; "name@a..b" expands to lags a..b and an
/// empty string or "none" yields the empty set.
std::vector<VarRef> parse_var_list(std::string_view text);

/// Time-delay embedding of one series plus optional lagged extra columns.
struct EmbeddingSpec {
  std::string target;
  std::size_t target_lag = 0;
  std::vector<std::size_t> lags;      // strictly increasing, each >= 1
  std::vector<VarRef> extra_columns;  // e.g. {"y", 1}
};

/// Builds y = target@0 and X = vars, aligned on a common time index.
///
/// `min_offset` forces the first usable time index to be at least that value
/// so several problems built from one dataset share identical rows.
RegressionProblem build_problem(const Dataset& data, const VarRef& target,
                                std::span<const VarRef> vars, std::size_t min_offset = 0);

RegressionProblem build_lag_problem(const Dataset& series, const EmbeddingSpec& spec);

/// Zero mean, unit population variance for y and every column of X.
RegressionProblem standardize(const RegressionProblem& problem);

double mean(std::span<const double> v);
/// Population variance (divisor N).
double variance(std::span<const double> v);

Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(std::string_view text, std::string_view source = "<memory>");
/// Writes with shortest round-trip formatting so load_csv(save_csv(d)) == d bitwise.
void save_csv(const Dataset& data, const std::filesystem::path& path);
std::string format_csv(const Dataset& data);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
/// `v` rounded to `digits` significant digits; digits <= 0 returns v unchanged.
double round_significant(double v, int digits);
/// "%.<digits>g"-style text, or format_double when digits <= 0.
std::string format_number(double v, int digits);

}  // namespace noisevar
