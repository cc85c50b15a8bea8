#include "noisevar/scan.hpp"

#include <algorithm>

#include "noisevar/error.hpp"

namespace noisevar {

std::string subset_label(const std::vector<VarRef>& vars) {
  if (vars.empty()) return "{none}";
  std::string s = "{";
  for (std::size_t k = 0; k < vars.size(); ++k) {
    if (k) s += ", ";
    s += vars[k].label();
  }
  return s + "}";
}

namespace {

ScanRow evaluate(const Dataset& data, const VarRef& target, const std::vector<VarRef>& vars,
                 std::size_t offset, const AnalysisOptions& options) {
  ScanRow row;
  row.label = subset_label(vars);
  row.variables = vars;
  try {
    const auto problem = build_problem(data, target, vars, offset);
    row.rows = problem.rows();
    const auto result = analyze(problem, options);
    row.sigma_lr_fractional = result.report.linear.sigma_lr_fractional;
    row.sigma_nl_fractional = result.report.sigma_nl_fractional;
    row.stderr_nl = result.report.stderr_nl_fractional;
    row.ok = true;
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

ScanReport subset_scan(const Dataset& data, const VarRef& target,
                       const std::vector<std::vector<VarRef>>& subsets, const AnalysisOptions& options) {
  if (!data.find(target.name)) throw Error(ErrorKind::InvalidArgument, "no column named '" + target.name + "'");
  std::size_t offset = target.lag;
  for (const auto& s : subsets) {
    for (const auto& v : s) {
      if (!data.find(v.name)) throw Error(ErrorKind::InvalidArgument, "no column named '" + v.name + "'");
      offset = std::max(offset, v.lag);
    }
  }
  ScanReport report;
  report.target = target.label();
  report.stop_threshold = 0.0;
  for (const auto& s : subsets) report.rows.push_back(evaluate(data, target, s, offset, options));
  return report;
}

std::optional<std::size_t> choose_embedding_dimension(const std::vector<ScanRow>& rows, double stop_threshold) {
  if (rows.empty() || !rows.front().ok) return std::nullopt;
  std::size_t best_k = 0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (!rows[k].ok || !rows[k - 1].ok) continue;
    if (rows[k - 1].sigma_nl_fractional - rows[k].sigma_nl_fractional > stop_threshold) best_k = k;
  }
  return best_k + 1;
}

ScanReport embedding_scan(const Dataset& series, const std::string& target, std::size_t max_lag,
                          double stop_threshold, const AnalysisOptions& options) {
  if (max_lag < 1) throw Error(ErrorKind::InvalidArgument, "embedding_scan: max_lag must be >= 1");
  if (!(stop_threshold >= 0.0)) throw Error(ErrorKind::InvalidArgument, "embedding_scan: stop_threshold must be >= 0");
  if (!series.find(target)) throw Error(ErrorKind::InvalidArgument, "no column named '" + target + "'");
  if (max_lag + 2 > series.rows()) {
    throw Error(ErrorKind::Data, "embedding_scan: max_lag " + std::to_string(max_lag) + " leaves fewer than 2 rows");
  }
  ScanReport report;
  report.target = target;
  report.stop_threshold = stop_threshold;
  std::vector<VarRef> vars;
  for (std::size_t k = 0; k <= max_lag; ++k) {
    if (k > 0) vars.push_back({target, k});
    report.rows.push_back(evaluate(series, {target, 0}, vars, max_lag, options));
  }
  report.chosen_de = choose_embedding_dimension(report.rows, stop_threshold);
  return report;
}

}  // namespace noisevar
