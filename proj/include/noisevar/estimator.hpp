#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "noisevar/core.hpp"
#include "noisevar/linreg.hpp"
#include "noisevar/pairgrid.hpp"

namespace noisevar {

/// P(eps) read off the conditional-probability matrix by the plateau rule.
struct ProbabilityCurve {
  std::vector<double> eps;
  std::vector<double> p;
  std::vector<double> std_err;
  std::vector<std::size_t> chosen_delta;  // delta bin that supplied each point
  std::size_t min_count_used = 0;

  std::size_t size() const noexcept { return eps.size(); }
};

/// For every eps_i, the largest P(eps_i | delta_j) over delta bins holding at
/// least `min_count` pairs. Ties go to the smallest delta.
ProbabilityCurve plateau_select(const CondProbMatrix& m, std::size_t min_count = 50);

struct QuadratureResult {
  double value = 0.0;
  double std_err = 0.0;
};

/// S_n = integral_0^eps_max eps^(n-1) (1 - P(eps)) d eps.
///
/// Composite Simpson on the (non-uniform) knots; P is held at p[0] on
/// [0, eps_0] and that segment is integrated in closed form. An odd interval
/// count leaves the last interval to the trapezoid rule. The standard error
/// propagates the per-knot binomial errors through the quadrature weights.
QuadratureResult weighted_tail_integral(const ProbabilityCurve& curve, int n);

/// sigma_r^2 = integral eps (1 - P(eps)) d eps.
double variance_integral(const ProbabilityCurve& curve);
/// <|dr|^n> = n * S_n for n in {1, 2, 3}.
double moment(const ProbabilityCurve& curve, int n);

struct DensitySample {
  double eps = 0.0;
  double density = 0.0;
};

/// dP/d eps by finite differences, clipped at zero.
std::vector<DensitySample> residual_density(const ProbabilityCurve& curve);

struct DirectEstimate {
  double value = 0.0;    // sigma_r^2 = E[(dy)^2 | |dx| <= delta] / 2
  double std_err = 0.0;
  double delta = 0.0;
  std::uint64_t pairs = 0;
  std::size_t delta_bin = 0;
};

/// Conditional-expectation estimate over the smallest delta bin whose
/// cumulative pair count reaches `min_count`. Uses the grid's delta edges.
DirectEstimate direct_variance(const RegressionProblem& problem, const PairGrid& grid,
                               std::size_t min_count = 50, std::size_t workers = 0);

struct ErfFit {
  double sigma = 0.0;
  double rms_misfit = 0.0;
};

/// Least-squares fit of P(eps) = erf(eps / (2 sigma)) over sigma.
ErfFit erf_fit(const ProbabilityCurve& curve);
double erf_model(double eps, double sigma);

/// CSV with columns eps,p_data,p_fit.
std::string erf_fit_csv(const ProbabilityCurve& curve, const ErfFit& fit, int significant_digits);

struct AnalysisOptions {
  GridConfig grid;
  std::size_t min_count = 50;
  bool standardize = true;
  std::size_t workers = 0;
  /// Flag nonlinearity when LR minus NL fractional error exceeds this.
  double nonlinearity_margin = 0.05;
};

struct EstimateReport {
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::string target;
  std::vector<std::string> variables;
  double sigma_y = 0.0;      // in analysed units (1 when standardized)
  double y_scale = 1.0;      // original-units standard deviation of y

  double sigma2_nl = 0.0;
  double sigma_nl_fractional = 0.0;
  double stderr_nl_fractional = 0.0;
  double moments[4] = {0.0, 0.0, 0.0, 0.0};  // index n = 1..3; [0] unused

  double sigma2_direct = 0.0;
  double sigma_direct_fractional = 0.0;
  double stderr_direct_fractional = 0.0;
  double direct_delta = 0.0;
  std::uint64_t direct_pairs = 0;

  std::optional<ErfFit> erf;
  std::string erf_error;

  LinearFit linear;
  double lr_nl_gap = 0.0;
  bool nonlinear = false;

  double sigma2_unconditional = 0.0;
  std::size_t min_count = 0;
  std::uint64_t total_pairs = 0;
};

/// Intermediate products of one analysis, kept for CSV export.
struct Analysis {
  RegressionProblem problem;
  PairGrid grid;
  CondProbMatrix matrix;
  ProbabilityCurve curve;
  EstimateReport report;
};

Analysis analyze(const RegressionProblem& problem, const AnalysisOptions& options = {});

}  // namespace noisevar
