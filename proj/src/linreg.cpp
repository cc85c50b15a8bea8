#include "noisevar/linreg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "noisevar/error.hpp"

namespace noisevar {

namespace {
constexpr double kMaxCondition = 1e12;
}

LinearFit fit_linear(const RegressionProblem& problem) {
  const auto n = static_cast<Eigen::Index>(problem.rows());
  const auto d = static_cast<Eigen::Index>(problem.dims());
  const Eigen::Map<const Eigen::VectorXd> y(problem.y.data(), n);
  const double my = y.mean();
  const double var_y = (y.array() - my).square().mean();

  LinearFit fit;
  if (d == 0) {
    fit.a0 = my;
    fit.sigma2_residual = var_y;
    fit.sigma2_direct = var_y;
    fit.sigma_lr_fractional = std::sqrt(var_y) / problem.sigma_y;
    return fit;
  }

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> x(problem.x.data(), n, d);
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mx;
  const Eigen::VectorXd yc = y.array() - my;

  // Conditioning is judged on the correlation matrix so units do not matter.
  const Eigen::VectorXd sd = (xc.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
  for (Eigen::Index k = 0; k < d; ++k) {
    if (!(sd(k) > 0.0)) {
      throw Error(ErrorKind::Numeric, "linear fit: column '" + problem.x_names[static_cast<std::size_t>(k)] +
                                          "' is constant");
    }
  }
  const Eigen::MatrixXd corr =
      (xc.transpose() * xc / static_cast<double>(n)).cwiseQuotient(sd * sd.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  const double lmin = eig.eigenvalues()(0);
  const double lmax = eig.eigenvalues()(d - 1);
  fit.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(fit.condition <= kMaxCondition)) {
    const Eigen::VectorXd v = eig.eigenvectors().col(0);
    std::string cols;
    for (Eigen::Index k = 0; k < d; ++k) {
      if (std::abs(v(k)) > 0.1) {
        if (!cols.empty()) cols += ", ";
        cols += problem.x_names[static_cast<std::size_t>(k)];
      }
    }
    throw Error(ErrorKind::Numeric, "linear fit: collinear explanatory variables {" + cols + "}");
  }

  // Least squares on centred data solves Cov(X) a = Cov(X, y).
  const Eigen::VectorXd a = xc.colPivHouseholderQr().solve(yc);
  fit.a.assign(a.data(), a.data() + d);
  fit.a0 = my - mx.dot(a);

  const Eigen::VectorXd cov_xy = xc.transpose() * yc / static_cast<double>(n);
  fit.sigma2_residual = std::max(0.0, var_y - a.dot(cov_xy));
  fit.sigma2_direct = (yc - xc * a).squaredNorm() / static_cast<double>(n);
  if (std::abs(fit.sigma2_residual - fit.sigma2_direct) > 1e-8 * var_y + 1e-14) {
    throw Error(ErrorKind::Numeric, "linear fit: covariance and residual variance disagree");
  }
  fit.sigma_lr_fractional = std::sqrt(fit.sigma2_residual) / problem.sigma_y;
  return fit;
}

}  // namespace noisevar
