#pragma once

#include <optional>
#include <string>
#include <vector>

#include "noisevar/core.hpp"
#include "noisevar/estimator.hpp"

namespace noisevar {

struct ScanRow {
  std::string label;
  std::vector<VarRef> variables;
  bool ok = false;
  std::string error;
  std::size_t rows = 0;
  double sigma_lr_fractional = 0.0;
  double sigma_nl_fractional = 0.0;
  double stderr_nl = 0.0;

  friend bool operator==(const ScanRow&, const ScanRow&) = default;
};

struct ScanReport {
  std::string target;
  std::vector<ScanRow> rows;
  std::optional<std::size_t> chosen_de;
  double stop_threshold = 0.02;

  friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

/// "{none}" for the empty set, else "{x@1, y@1}".
std::string subset_label(const std::vector<VarRef>& vars);

/// One row per subset, all evaluated on the rows left after the largest lag
/// of any subset. A failing subset is recorded as a row with ok == false.
ScanReport subset_scan(const Dataset& data, const VarRef& target,
                       const std::vector<std::vector<VarRef>>& subsets,
                       const AnalysisOptions& options = {});

/// Lag sets {target@1..target@k} for k = 0..max_lag on common rows.
/// chosen_de = k* + 1 where k* is the largest k whose NL error improves on
/// k - 1 by more than `stop_threshold` (0 when none does).
ScanReport embedding_scan(const Dataset& series, const std::string& target, std::size_t max_lag,
                          double stop_threshold = 0.02, const AnalysisOptions& options = {});

std::optional<std::size_t> choose_embedding_dimension(const std::vector<ScanRow>& rows, double stop_threshold);

}  // namespace noisevar
