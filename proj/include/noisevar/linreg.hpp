#pragma once

#include <vector>

#include "noisevar/core.hpp"

namespace noisevar {

/// Ordinary least-squares baseline y = a0 + sum_k a_k x_k.
struct LinearFit {
  double a0 = 0.0;
  std::vector<double> a;
  double sigma2_residual = 0.0;  // sigma_y^2 - sum_k a_k cov(y, x_k)
  double sigma2_direct = 0.0;    // mean squared residual, for cross-checking
  double sigma_lr_fractional = 0.0;
  double condition = 1.0;  // of the correlation matrix of X
};

/// Throws ErrorKind::Numeric naming the collinear columns when the
/// correlation matrix of X has condition number above 1e12.
LinearFit fit_linear(const RegressionProblem& problem);

}  // namespace noisevar
