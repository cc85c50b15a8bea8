#include "noisevar/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "noisevar/error.hpp"

namespace noisevar {

ProbabilityCurve plateau_select(const CondProbMatrix& m, std::size_t min_count) {
  if (min_count < 1) throw Error(ErrorKind::InvalidArgument, "plateau_select: min_count must be >= 1");
  std::vector<std::size_t> qualified;
  for (std::size_t j = 0; j < m.delta_count(); ++j) {
    if (m.defined(j) && m.counts[j] >= min_count) qualified.push_back(j);
  }
  if (qualified.empty()) {
    throw Error(ErrorKind::Data, "no delta bin holds " + std::to_string(min_count) +
                                     " pairs; use a larger dataset or a smaller min_count");
  }
  ProbabilityCurve curve;
  curve.min_count_used = min_count;
  curve.eps = m.eps_values;
  const std::size_t ne = m.eps_count();
  curve.p.resize(ne);
  curve.std_err.resize(ne);
  curve.chosen_delta.resize(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    std::size_t best = qualified.front();
    for (auto j : qualified) {
      if (m.prob(i, j) > m.prob(i, best)) best = j;
    }
    curve.p[i] = m.prob(i, best);
    curve.std_err[i] = m.error(i, best);
    curve.chosen_delta[i] = best;
  }
  return curve;
}

QuadratureResult weighted_tail_integral(const ProbabilityCurve& curve, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "moment order must be >= 1");
  const std::size_t k = curve.size();
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "empty probability curve");
  const auto& e = curve.eps;
  const double order = static_cast<double>(n);

  // Quadrature weight of each knot's integrand value.
  std::vector<double> w(k, 0.0);
  std::size_t i = 0;
  for (; i + 2 < k; i += 2) {
    const double h0 = e[i + 1] - e[i];
    const double h1 = e[i + 2] - e[i + 1];
    const double s = h0 + h1;
    w[i] += s / 6.0 * (2.0 - h1 / h0);
    w[i + 1] += s * s * s / (6.0 * h0 * h1);
    w[i + 2] += s / 6.0 * (2.0 - h0 / h1);
  }
  if (i + 1 < k) {
    const double h = e[i + 1] - e[i];
    w[i] += h / 2.0;
    w[i + 1] += h / 2.0;
  }

  const double head_weight = std::pow(e[0], order) / order;  // closed form on [0, eps_0]
  QuadratureResult r;
  r.value = head_weight * (1.0 - curve.p[0]);
  double var = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double g = std::pow(e[j], order - 1.0);
    r.value += w[j] * g * (1.0 - curve.p[j]);
    const double dj = w[j] * g + (j == 0 ? head_weight : 0.0);
    const double se = curve.std_err.empty() ? 0.0 : curve.std_err[j];
    var += dj * dj * se * se;
  }
  r.std_err = std::sqrt(var);
  return r;
}

double variance_integral(const ProbabilityCurve& curve) { return weighted_tail_integral(curve, 2).value; }

double moment(const ProbabilityCurve& curve, int n) {
  if (n < 1 || n > 3) throw Error(ErrorKind::InvalidArgument, "moment order must be 1, 2 or 3");
  return static_cast<double>(n) * weighted_tail_integral(curve, n).value;
}

std::vector<DensitySample> residual_density(const ProbabilityCurve& curve) {
  const std::size_t k = curve.size();
  if (k < 3) throw Error(ErrorKind::InvalidArgument, "residual_density: need at least 3 curve points");
  const auto& e = curve.eps;
  const auto& p = curve.p;
  std::vector<DensitySample> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == k ? k - 1 : i + 1;
    out[i] = {e[i], std::max(0.0, (p[hi] - p[lo]) / (e[hi] - e[lo]))};
  }
  return out;
}

DirectEstimate direct_variance(const RegressionProblem& problem, const PairGrid& grid,
                               std::size_t min_count, std::size_t workers) {
  if (min_count < 1) throw Error(ErrorKind::InvalidArgument, "direct_variance: min_count must be >= 1");
  if (workers == 0) workers = default_workers();
  const auto& edges = grid.delta_values;
  const std::size_t cells = edges.size() + 1;

  struct Partial {
    std::vector<std::uint64_t> count;
    std::vector<double> sum2;
    std::vector<double> sum4;
  };
  const auto chunks = pair_chunks(problem.rows());
  std::vector<Partial> partial(chunks.size());
  const std::size_t n = problem.rows();
  run_chunks(chunks.size(), workers, [&](std::size_t c) {
    Partial acc{std::vector<std::uint64_t>(cells, 0), std::vector<double>(cells, 0.0),
                std::vector<double>(cells, 0.0)};
    for (std::size_t i = chunks[c].first; i < chunks[c].second; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto b = bin_index(edges, max_norm_distance(problem, i, j));
        const double dy = problem.y[i] - problem.y[j];
        const double dy2 = dy * dy;
        ++acc.count[b];
        acc.sum2[b] += dy2;
        acc.sum4[b] += dy2 * dy2;
      }
    }
    partial[c] = std::move(acc);
  });

  // Merge in chunk order so the floating-point sums do not depend on workers.
  std::vector<std::uint64_t> count(cells, 0);
  std::vector<double> sum2(cells, 0.0);
  std::vector<double> sum4(cells, 0.0);
  for (const auto& part : partial) {
    for (std::size_t b = 0; b < cells; ++b) {
      count[b] += part.count[b];
      sum2[b] += part.sum2[b];
      sum4[b] += part.sum4[b];
    }
  }

  std::uint64_t c = 0;
  double s2 = 0.0;
  double s4 = 0.0;
  for (std::size_t j = 0; j < edges.size(); ++j) {
    c += count[j];
    s2 += sum2[j];
    s4 += sum4[j];
    if (c >= min_count) {
      const double cn = static_cast<double>(c);
      const double m2 = s2 / cn;
      const double var = std::max(0.0, s4 / cn - m2 * m2);
      DirectEstimate est;
      est.value = 0.5 * m2;
      est.std_err = 0.5 * std::sqrt(var / cn);
      est.delta = edges[j];
      est.pairs = c;
      est.delta_bin = j;
      return est;
    }
  }
  throw Error(ErrorKind::Data, "direct_variance: no delta bin holds " + std::to_string(min_count) + " pairs");
}

double erf_model(double eps, double sigma) { return std::erf(eps / (2.0 * sigma)); }

ErfFit erf_fit(const ProbabilityCurve& curve) {
  const std::size_t k = curve.size();
  std::size_t interior = 0;
  for (double p : curve.p) interior += (p > 0.0 && p < 1.0) ? 1 : 0;
  if (interior < 5) {
    throw Error(ErrorKind::Data, "erf_fit: degenerate curve (" + std::to_string(interior) +
                                     " points strictly between 0 and 1, need 5)");
  }
  const auto objective = [&](double log_sigma) {
    const double s = std::exp(log_sigma);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double r = curve.p[i] - erf_model(curve.eps[i], s);
      acc += r * r;
    }
    return acc;
  };
  const double lo = std::log(curve.eps.front() / 10.0);
  const double hi = std::log(10.0 * curve.eps.back());

  // Coarse scan to bracket the global minimum, then golden-section inside it.
  constexpr int kScan = 200;
  const double step = (hi - lo) / kScan;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= kScan; ++s) {
    const double v = objective(lo + step * s);
    if (v < best_value) {
      best_value = v;
      best = s;
    }
  }
  double a = lo + step * std::max(best - 1, 0);
  double b = lo + step * std::min(best + 1, kScan);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {std::exp(x), std::sqrt(objective(x) / static_cast<double>(k))};
}

std::string erf_fit_csv(const ProbabilityCurve& curve, const ErfFit& fit, int significant_digits) {
  std::string out = "eps,p_data,p_fit\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += format_number(curve.eps[i], significant_digits) + ',' +
           format_number(curve.p[i], significant_digits) + ',' +
           format_number(erf_model(curve.eps[i], fit.sigma), significant_digits) + '\n';
  }
  return out;
}

namespace {

double fractional(double variance, double sigma_y) { return std::sqrt(std::max(variance, 0.0)) / sigma_y; }

// Error of sqrt(v)/sigma_y given the error of v.
double fractional_error(double variance, double variance_err, double sigma_y) {
  if (variance > 0.0) return variance_err / (2.0 * std::sqrt(variance) * sigma_y);
  return std::sqrt(variance_err) / sigma_y;
}

}  // namespace

Analysis analyze(const RegressionProblem& problem, const AnalysisOptions& options) {
  Analysis a;
  a.problem = options.standardize ? standardize(problem) : problem;
  const auto& prob = a.problem;
  a.grid = accumulate_pairs(prob, options.grid, options.workers);
  a.matrix = conditional_probabilities(a.grid);
  a.curve = plateau_select(a.matrix, options.min_count);

  auto& r = a.report;
  r.rows = prob.rows();
  r.dims = prob.dims();
  r.target = prob.y_name;
  r.variables = prob.x_names;
  r.sigma_y = prob.sigma_y;
  r.y_scale = prob.y_scale;
  r.min_count = options.min_count;
  r.total_pairs = a.grid.total_pairs;

  const auto s2 = weighted_tail_integral(a.curve, 2);
  r.sigma2_nl = s2.value;
  r.sigma_nl_fractional = fractional(s2.value, prob.sigma_y);
  r.stderr_nl_fractional = fractional_error(s2.value, s2.std_err, prob.sigma_y);
  for (int n = 1; n <= 3; ++n) r.moments[n] = moment(a.curve, n);

  // The all-pairs column is the unconditional distribution; the plateau
  // maximum can only lie above it, hence a smaller variance.
  const std::size_t last = a.matrix.delta_count() - 1;
  if (a.matrix.counts[last] >= options.min_count) {
    ProbabilityCurve unconditional = a.curve;
    for (std::size_t i = 0; i < unconditional.size(); ++i) {
      unconditional.p[i] = a.matrix.prob(i, last);
      unconditional.std_err[i] = a.matrix.error(i, last);
      unconditional.chosen_delta[i] = last;
    }
    r.sigma2_unconditional = variance_integral(unconditional);
    if (r.sigma2_nl > r.sigma2_unconditional * (1.0 + 1e-12) + 1e-300) {
      throw Error(ErrorKind::Numeric, "internal: plateau variance exceeds the unconditional variance");
    }
  }

  const auto direct = direct_variance(prob, a.grid, options.min_count, options.workers);
  r.sigma2_direct = direct.value;
  r.sigma_direct_fractional = fractional(direct.value, prob.sigma_y);
  r.stderr_direct_fractional = fractional_error(direct.value, direct.std_err, prob.sigma_y);
  r.direct_delta = direct.delta;
  r.direct_pairs = direct.pairs;

  try {
    r.erf = erf_fit(a.curve);
  } catch (const Error& e) {
    r.erf_error = e.what();
  }

  r.linear = fit_linear(prob);
  r.lr_nl_gap = r.linear.sigma_lr_fractional - r.sigma_nl_fractional;
  r.nonlinear = r.lr_nl_gap > options.nonlinearity_margin;
  return a;
}

}  // namespace noisevar
