#include "noisevar/generators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "noisevar/error.hpp"

namespace noisevar {

namespace {

constexpr double kDivergence = 1e6;

void check_noise(double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidArgument, "noise standard deviation must be finite and >= 0");
  }
}

[[noreturn]] void diverged(const char* system, std::size_t step) {
  throw Error(ErrorKind::Numeric, std::string(system) + " map diverged at step " + std::to_string(step) +
                                      "; check the parameters");
}

}  // namespace

double GaussianSource::next() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::vector<double> gaussian_noise(std::size_t n, double sigma, std::uint64_t seed) {
  check_noise(sigma);
  std::vector<double> out(n, 0.0);
  if (sigma == 0.0) return out;
  GaussianSource source(seed);
  for (auto& v : out) v = sigma * source.next();
  return out;
}

void IkedaConfig::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "ikeda: n must be >= 1");
  check_noise(sigma_r);
  if (!(B > 0.0 && B < 1.0)) throw Error(ErrorKind::InvalidArgument, "ikeda: B must lie in (0, 1)");
}

std::complex<double> ikeda_step(const IkedaConfig& cfg, std::complex<double> z) {
  const double phase = cfg.kappa - cfg.alpha / (1.0 + std::norm(z));
  return cfg.p + cfg.B * z * std::polar(1.0, phase);
}

Dataset gen_ikeda(const IkedaConfig& cfg) {
  cfg.validate();
  std::complex<double> z = cfg.z0;
  for (std::size_t t = 0; t < cfg.transient; ++t) {
    z = ikeda_step(cfg, z);
    if (std::abs(z) > kDivergence) diverged("ikeda", t);
  }
  const auto noise = gaussian_noise(cfg.n, cfg.sigma_r, cfg.seed);
  std::vector<double> xs(cfg.n), ys(cfg.n);
  for (std::size_t t = 0; t < cfg.n; ++t) {
    z = ikeda_step(cfg, z);
    if (std::abs(z) > kDivergence) diverged("ikeda", cfg.transient + t);
    if (cfg.noise_mode == NoiseMode::Iterative) {
      z = {z.real() + noise[t], z.imag()};
      xs[t] = z.real();
    } else {
      xs[t] = z.real() + noise[t];
    }
    ys[t] = z.imag();
  }
  return Dataset({"x", "y"}, {std::move(xs), std::move(ys)});
}

void LorenzConfig::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "lorenz: n must be >= 1");
  if (!(dt_out > 0.0)) throw Error(ErrorKind::InvalidArgument, "lorenz: dt_out must be > 0");
  if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "lorenz: tolerance must be > 0");
  if (!(transient_time >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lorenz: transient_time must be >= 0");
  check_noise(sigma_r);
}

std::array<double, 3> lorenz_derivative(const LorenzConfig& cfg, const std::array<double, 3>& u) {
  return {cfg.sigma * (u[1] - u[0]), cfg.r * u[0] - u[1] - u[0] * u[2], u[0] * u[1] - cfg.b * u[2]};
}

std::array<double, 3> lorenz_advance(const LorenzConfig& cfg, std::array<double, 3> u, double duration) {
  using State = std::array<double, 3>;
  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2, (void)c3, (void)c4, (void)c5;  // autonomous system

  const auto f = [&](const State& s) { return lorenz_derivative(cfg, s); };
  const auto combine = [&](const State& base, double h, std::initializer_list<std::pair<double, const State*>> terms) {
    State out = base;
    for (const auto& [coef, k] : terms) {
      for (int i = 0; i < 3; ++i) out[i] += h * coef * (*k)[i];
    }
    return out;
  };

  const double tol = cfg.tolerance;
  double t = 0.0;
  double h = duration / 8.0;
  State k1 = f(u);
  while (t < duration) {
    if (t + h > duration) h = duration - t;
    if (h < 1e-14 * std::max(1.0, duration)) {
      throw Error(ErrorKind::Numeric, "lorenz: step size underflow");
    }
    const State k2 = f(combine(u, h, {{a21, &k1}}));
    const State k3 = f(combine(u, h, {{a31, &k1}, {a32, &k2}}));
    const State k4 = f(combine(u, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 = f(combine(u, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = f(combine(u, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State next = combine(u, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = f(next);
    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = tol + tol * std::max(std::abs(u[i]), std::abs(next[i]));
      err = std::max(err, std::abs(e) / scale);
    }
    if (!std::isfinite(err)) throw Error(ErrorKind::Numeric, "lorenz: integration produced non-finite values");
    if (err <= 1.0) {
      t += h;
      u = next;
      k1 = k7;  // first-same-as-last
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  return u;
}

Dataset gen_lorenz(const LorenzConfig& cfg) {
  cfg.validate();
  auto u = cfg.initial;
  double remaining = cfg.transient_time;
  while (remaining > 0.0) {
    const double step = std::min(cfg.dt_out, remaining);
    u = lorenz_advance(cfg, u, step);
    remaining -= step;
    if (remaining < 1e-12 * cfg.dt_out) remaining = 0.0;
  }
  const auto noise = gaussian_noise(cfg.n, cfg.sigma_r, cfg.seed);
  std::vector<double> xs(cfg.n), ys(cfg.n), zs(cfg.n);
  for (std::size_t t = 0; t < cfg.n; ++t) {
    u = lorenz_advance(cfg, u, cfg.dt_out);
    if (cfg.noise_mode == NoiseMode::Iterative) {
      u[0] += noise[t];
      xs[t] = u[0];
    } else {
      xs[t] = u[0] + noise[t];
    }
    ys[t] = u[1];
    zs[t] = u[2];
  }
  return Dataset({"x", "y", "z"}, {std::move(xs), std::move(ys), std::move(zs)});
}

void HenonConfig::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "henon: n must be >= 1");
  check_noise(sigma_r);
}

Dataset gen_henon(const HenonConfig& cfg) {
  cfg.validate();
  double prev1 = 0.0;  // x_{t-1}
  double prev2 = 0.0;  // x_{t-2}
  const auto step = [&] { return 1.0 - 1.4 * prev1 * prev1 + 0.3 * prev2; };
  for (std::size_t t = 0; t < cfg.transient; ++t) {
    const double x = step();
    if (std::abs(x) > kDivergence) diverged("henon", t);
    prev2 = prev1;
    prev1 = x;
  }
  const auto noise = gaussian_noise(cfg.n, cfg.sigma_r, cfg.seed);
  std::vector<double> xs(cfg.n);
  for (std::size_t t = 0; t < cfg.n; ++t) {
    double x = step();
    if (std::abs(x) > kDivergence) diverged("henon", cfg.transient + t);
    if (cfg.noise_mode == NoiseMode::Iterative) {
      x += noise[t];
      xs[t] = x;
    } else {
      xs[t] = x + noise[t];
    }
    prev2 = prev1;
    prev1 = x;
  }
  return Dataset({"x"}, {std::move(xs)});
}

}  // namespace noisevar
