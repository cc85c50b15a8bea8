#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "noisevar/core.hpp"

namespace noisevar {

/// Log-spaced binning of the (|dy|, |dx|) plane.
///
/// Bin edges are edge_k = min * (max/min)^(k/n) for k = 0..n, with edge_n
/// pinned to `max`. Index 0 collects every separation <= min (exact ties
/// included); separations above `max` fall outside the cumulative counts.
struct GridConfig {
  std::size_t n_eps_bins = 40;
  std::size_t n_delta_bins = 40;
  double eps_min = 0.0;
  double eps_max = 0.0;
  double delta_min = 0.0;
  double delta_max = 0.0;
  bool auto_range = true;
  /// Percentiles (in percent) of the nonzero separations used for the lower
  /// edges when auto_range is set.
  double eps_percentile = 0.1;
  double delta_percentile = 0.025;

  void validate() const;
  std::vector<double> eps_edges() const;
  std::vector<double> delta_edges() const;
};

/// Fills in eps/delta ranges from the data when `config.auto_range` is set,
/// then validates. Returns the config unchanged (but validated) otherwise.
GridConfig resolve_range(const RegressionProblem& problem, GridConfig config);

/// Raw (non-cumulative) pair histogram: (n_eps + 2) x (n_delta + 2) cells,
/// the last row/column being overflow beyond eps_max/delta_max.
struct RawHistogram {
  std::size_t eps_cells = 0;
  std::size_t delta_cells = 0;
  std::vector<std::uint64_t> counts;  // row-major [eps][delta]

  RawHistogram() = default;
  RawHistogram(std::size_t eps_cells, std::size_t delta_cells);

  std::uint64_t& at(std::size_t i, std::size_t j) { return counts[i * delta_cells + j]; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * delta_cells + j]; }
  std::uint64_t total() const;
  RawHistogram& operator+=(const RawHistogram& other);
  friend bool operator==(const RawHistogram&, const RawHistogram&) = default;
};

/// Cumulative pair counts.
///
/// joint(i, j) = #pairs with |dy| <= eps_i and |dx| <= delta_j for
/// i in [0, n_eps], j in [0, n_delta].
struct PairGrid {
  GridConfig config;
  std::vector<double> eps_values;
  std::vector<double> delta_values;
  std::vector<std::uint64_t> joint;           // (n_eps+1) x (n_delta+1), row-major
  std::vector<std::uint64_t> marginal_delta;  // n_delta+1
  std::uint64_t total_pairs = 0;
  RawHistogram raw;

  std::size_t eps_count() const noexcept { return eps_values.size(); }
  std::size_t delta_count() const noexcept { return delta_values.size(); }
  std::uint64_t at(std::size_t i, std::size_t j) const { return joint[i * delta_count() + j]; }
  friend bool operator==(const PairGrid& a, const PairGrid& b) {
    return a.eps_values == b.eps_values && a.delta_values == b.delta_values && a.joint == b.joint &&
           a.marginal_delta == b.marginal_delta && a.total_pairs == b.total_pairs && a.raw == b.raw;
  }
};

/// Max-norm distance between rows a and b of X (0 when d = 0).
double max_norm_distance(const RegressionProblem& problem, std::size_t a, std::size_t b);

/// Index of the first edge >= s, or edges.size() for overflow.
std::size_t bin_index(const std::vector<double>& edges, double s);

/// Row ranges [begin, end) for unordered pairs (i, j>i) split into chunks of
/// roughly equal pair count. The split depends only on N, never on the number
/// of workers, so per-chunk floating-point results merge identically.
std::vector<std::pair<std::size_t, std::size_t>> pair_chunks(std::size_t n);

/// Histogram of all pairs (i, j) with begin <= i < end and i < j < N.
RawHistogram accumulate_rows(const RegressionProblem& problem, const GridConfig& resolved,
                             std::size_t begin, std::size_t end);

/// Prefix-sums a raw histogram into a PairGrid.
PairGrid finalize_grid(const GridConfig& resolved, RawHistogram raw, std::uint64_t total_pairs);

/// Full O(N^2) pass. `workers == 0` uses the NOISEVAR_WORKERS environment
/// variable or 1. The result is bit-identical for any worker count.
PairGrid accumulate_pairs(const RegressionProblem& problem, const GridConfig& config,
                          std::size_t workers = 0);

std::size_t default_workers();

/// Runs `fn(chunk_index)` for every chunk on up to `workers` threads.
template <typename Fn>
void run_chunks(std::size_t chunk_count, std::size_t workers, Fn&& fn);

/// P(eps_i | delta_j) with binomial standard errors. Cells whose delta column
/// holds no pairs are NaN and report defined() == false.
struct CondProbMatrix {
  std::vector<double> eps_values;
  std::vector<double> delta_values;
  std::vector<double> p;       // (n_eps+1) x (n_delta+1)
  std::vector<double> std_err;  // same shape
  std::vector<std::uint64_t> counts;

  std::size_t eps_count() const noexcept { return eps_values.size(); }
  std::size_t delta_count() const noexcept { return delta_values.size(); }
  double prob(std::size_t i, std::size_t j) const { return p[i * delta_count() + j]; }
  double error(std::size_t i, std::size_t j) const { return std_err[i * delta_count() + j]; }
  bool defined(std::size_t j) const { return counts[j] > 0; }
};

CondProbMatrix conditional_probabilities(const PairGrid& grid);

/// CSV with columns eps,delta,p,stderr,n_pairs (undefined cells omitted).
std::string condprob_csv(const CondProbMatrix& m, int significant_digits);

}  // namespace noisevar

#include "noisevar/detail/run_chunks.hpp"
