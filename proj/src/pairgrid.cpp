#include "noisevar/pairgrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>

#include "noisevar/error.hpp"

namespace noisevar {

namespace {

// Above this many pairs the auto-range percentiles come from a strided sample.
constexpr std::uint64_t kExactRangePairs = 8'000'000;
constexpr std::size_t kTargetChunks = 64;

std::vector<double> log_edges(double lo, double hi, std::size_t n) {
  std::vector<double> edges(n + 1);
  const double ratio = hi / lo;
  for (std::size_t k = 0; k <= n; ++k) {
    edges[k] = lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(n));
  }
  edges.front() = lo;
  edges.back() = hi;
  return edges;
}

// Lower-order-statistic percentile of the nonzero entries; nullopt if none.
std::optional<std::pair<double, double>> percentile_range(std::vector<double>& values, double pct) {
  std::erase(values, 0.0);
  if (values.empty()) return std::nullopt;
  const auto max = *std::max_element(values.begin(), values.end());
  const auto k = static_cast<std::size_t>(std::floor(pct / 100.0 * static_cast<double>(values.size() - 1)));
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  double lo = values[k];
  if (!(lo < max)) lo = max * 1e-3;
  return std::make_pair(lo, max);
}

}  // namespace

void GridConfig::validate() const {
  if (n_eps_bins < 1 || n_delta_bins < 1) throw Error(ErrorKind::InvalidArgument, "grid: bin counts must be >= 1");
  if (!(eps_min > 0.0) || !(delta_min > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid: eps_min and delta_min must be > 0");
  }
  if (!(eps_max > eps_min) || !(delta_max > delta_min)) {
    throw Error(ErrorKind::InvalidArgument, "grid: ranges must be strictly increasing");
  }
  if (!std::isfinite(eps_max) || !std::isfinite(delta_max)) {
    throw Error(ErrorKind::InvalidArgument, "grid: ranges must be finite");
  }
}

std::vector<double> GridConfig::eps_edges() const { return log_edges(eps_min, eps_max, n_eps_bins); }
std::vector<double> GridConfig::delta_edges() const { return log_edges(delta_min, delta_max, n_delta_bins); }

double max_norm_distance(const RegressionProblem& problem, std::size_t a, std::size_t b) {
  const std::size_t d = problem.d;
  const double* xa = problem.x.data() + a * d;
  const double* xb = problem.x.data() + b * d;
  double m = 0.0;
  for (std::size_t k = 0; k < d; ++k) m = std::max(m, std::abs(xa[k] - xb[k]));
  return m;
}

std::size_t bin_index(const std::vector<double>& edges, double s) {
  return static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), s) - edges.begin());
}

GridConfig resolve_range(const RegressionProblem& problem, GridConfig config) {
  if (!config.auto_range) {
    config.validate();
    return config;
  }
  if (!(config.eps_percentile >= 0.0 && config.eps_percentile < 100.0) ||
      !(config.delta_percentile >= 0.0 && config.delta_percentile < 100.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid: percentiles must lie in [0, 100)");
  }
  const std::size_t n = problem.rows();
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t stride = pairs <= kExactRangePairs ? 1 : (pairs + kExactRangePairs - 1) / kExactRangePairs;

  std::vector<double> dy, dx;
  dy.reserve(static_cast<std::size_t>(pairs / stride + 1));
  dx.reserve(static_cast<std::size_t>(pairs / stride + 1));
  double dy_max = 0.0;
  double dx_max = 0.0;
  std::uint64_t counter = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++counter) {
      const double sy = std::abs(problem.y[i] - problem.y[j]);
      const double sx = max_norm_distance(problem, i, j);
      dy_max = std::max(dy_max, sy);
      dx_max = std::max(dx_max, sx);
      if (counter % stride == 0) {
        dy.push_back(sy);
        dx.push_back(sx);
      }
    }
  }
  const auto er = percentile_range(dy, config.eps_percentile);
  if (!er) throw Error(ErrorKind::Data, "grid: all target separations are zero");
  config.eps_min = er->first;
  config.eps_max = dy_max;
  if (!(config.eps_min < config.eps_max)) config.eps_min = dy_max * 1e-3;

  if (const auto dr = percentile_range(dx, config.delta_percentile)) {
    config.delta_min = dr->first;
    config.delta_max = dx_max;
    if (!(config.delta_min < config.delta_max)) config.delta_min = dx_max * 1e-3;
  } else {
    // d = 0 or all inputs coincide: every pair lands in the underflow column.
    config.delta_min = 1.0;
    config.delta_max = 2.0;
  }
  config.validate();
  return config;
}

RawHistogram::RawHistogram(std::size_t eps_cells_, std::size_t delta_cells_)
    : eps_cells(eps_cells_), delta_cells(delta_cells_), counts(eps_cells_ * delta_cells_, 0) {}

std::uint64_t RawHistogram::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

RawHistogram& RawHistogram::operator+=(const RawHistogram& other) {
  if (other.eps_cells != eps_cells || other.delta_cells != delta_cells) {
    throw Error(ErrorKind::InvalidArgument, "histogram merge: shape mismatch");
  }
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
  return *this;
}

std::vector<std::pair<std::size_t, std::size_t>> pair_chunks(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> chunks;
  if (n < 2) return chunks;
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t per_chunk = std::max<std::uint64_t>(1, pairs / kTargetChunks);
  std::size_t begin = 0;
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    acc += n - 1 - i;
    if (acc >= per_chunk) {
      chunks.emplace_back(begin, i + 1);
      begin = i + 1;
      acc = 0;
    }
  }
  if (begin < n - 1) chunks.emplace_back(begin, n - 1);
  return chunks;
}

RawHistogram accumulate_rows(const RegressionProblem& problem, const GridConfig& resolved,
                             std::size_t begin, std::size_t end) {
  const auto eps = resolved.eps_edges();
  const auto delta = resolved.delta_edges();
  RawHistogram raw(eps.size() + 1, delta.size() + 1);
  const std::size_t n = problem.rows();
  end = std::min(end, n);
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto ei = bin_index(eps, std::abs(problem.y[i] - problem.y[j]));
      const auto dj = bin_index(delta, max_norm_distance(problem, i, j));
      ++raw.at(ei, dj);
    }
  }
  return raw;
}

PairGrid finalize_grid(const GridConfig& resolved, RawHistogram raw, std::uint64_t total_pairs) {
  PairGrid g;
  g.config = resolved;
  g.eps_values = resolved.eps_edges();
  g.delta_values = resolved.delta_edges();
  const std::size_t ne = g.eps_values.size();
  const std::size_t nd = g.delta_values.size();
  if (raw.eps_cells != ne + 1 || raw.delta_cells != nd + 1) {
    throw Error(ErrorKind::InvalidArgument, "finalize_grid: histogram shape does not match config");
  }
  g.joint.assign(ne * nd, 0);
  g.marginal_delta.assign(nd, 0);
  for (std::size_t i = 0; i < ne; ++i) {
    std::uint64_t row = 0;
    for (std::size_t j = 0; j < nd; ++j) {
      row += raw.at(i, j);
      g.joint[i * nd + j] = row + (i > 0 ? g.joint[(i - 1) * nd + j] : 0);
    }
  }
  std::uint64_t col = 0;
  for (std::size_t j = 0; j < nd; ++j) {
    for (std::size_t i = 0; i <= ne; ++i) col += raw.at(i, j);
    g.marginal_delta[j] = col;
  }
  g.total_pairs = total_pairs;
  g.raw = std::move(raw);
  return g;
}

std::size_t default_workers() {
  if (const char* env = std::getenv("NOISEVAR_WORKERS")) {
    char* end = nullptr;
    const auto v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return 1;
}

PairGrid accumulate_pairs(const RegressionProblem& problem, const GridConfig& config,
                          std::size_t workers) {
  const auto resolved = resolve_range(problem, config);
  if (workers == 0) workers = default_workers();
  const auto chunks = pair_chunks(problem.rows());
  std::vector<RawHistogram> partial(chunks.size());
  run_chunks(chunks.size(), workers, [&](std::size_t c) {
    partial[c] = accumulate_rows(problem, resolved, chunks[c].first, chunks[c].second);
  });
  RawHistogram raw(resolved.n_eps_bins + 2, resolved.n_delta_bins + 2);
  for (const auto& h : partial) raw += h;
  const std::uint64_t n = problem.rows();
  return finalize_grid(resolved, std::move(raw), n * (n - 1) / 2);
}

CondProbMatrix conditional_probabilities(const PairGrid& grid) {
  CondProbMatrix m;
  m.eps_values = grid.eps_values;
  m.delta_values = grid.delta_values;
  m.counts = grid.marginal_delta;
  const std::size_t ne = grid.eps_count();
  const std::size_t nd = grid.delta_count();
  m.p.assign(ne * nd, std::numeric_limits<double>::quiet_NaN());
  m.std_err.assign(ne * nd, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t j = 0; j < nd; ++j) {
    const auto n = grid.marginal_delta[j];
    if (n == 0) continue;
    for (std::size_t i = 0; i < ne; ++i) {
      const double p = static_cast<double>(grid.at(i, j)) / static_cast<double>(n);
      m.p[i * nd + j] = p;
      m.std_err[i * nd + j] = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
    }
  }
  return m;
}

std::string condprob_csv(const CondProbMatrix& m, int significant_digits) {
  std::string out = "eps,delta,p,stderr,n_pairs\n";
  for (std::size_t j = 0; j < m.delta_count(); ++j) {
    if (!m.defined(j)) continue;
    for (std::size_t i = 0; i < m.eps_count(); ++i) {
      out += format_number(m.eps_values[i], significant_digits) + ',' +
             format_number(m.delta_values[j], significant_digits) + ',' +
             format_number(m.prob(i, j), significant_digits) + ',' +
             format_number(m.error(i, j), significant_digits) + ',' + std::to_string(m.counts[j]) + '\n';
    }
  }
  return out;
}

}  // namespace noisevar
