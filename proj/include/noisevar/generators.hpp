#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "noisevar/core.hpp"

namespace noisevar {

/// Seeded standard-normal source with a fixed, portable algorithm:
/// std::mt19937_64 (bit-exact across standard libraries) feeding the
/// Box-Muller transform. Each pair of draws uses two 64-bit words,
/// u1 = ((w1 >> 11) + 1) / 2^53 in (0, 1] and u2 = (w2 >> 11) / 2^53 in [0, 1),
/// and yields sqrt(-2 ln u1) cos(2 pi u2) followed by sqrt(-2 ln u1) sin(2 pi u2).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::vector<double> gaussian_noise(std::size_t n, double sigma, std::uint64_t seed);

enum class NoiseMode {
  Iterative,     // noise is fed back into the dynamical state
  Superimposed,  // noise is added to the emitted observations only
};

struct IkedaConfig {
  double p = 1.0;
  double B = 0.9;
  double kappa = 0.4;
  double alpha = 6.0;
  std::size_t n = 2000;
  double sigma_r = 0.0;
  NoiseMode noise_mode = NoiseMode::Iterative;
  std::uint64_t seed = 1;
  std::size_t transient = 1000;
  std::complex<double> z0{0.0, 0.0};

  void validate() const;
};

/// z_{t+1} = p + B z_t exp(i (kappa - alpha / (1 + |z_t|^2))).
std::complex<double> ikeda_step(const IkedaConfig& cfg, std::complex<double> z);

/// Columns x, y (real and imaginary parts).
Dataset gen_ikeda(const IkedaConfig& cfg);

struct LorenzConfig {
  double r = 45.92;
  double b = 4.0;
  double sigma = 16.0;
  double dt_out = 0.1;
  std::size_t n = 2000;
  double sigma_r = 0.0;
  NoiseMode noise_mode = NoiseMode::Superimposed;
  std::uint64_t seed = 1;
  double transient_time = 20.0;
  std::array<double, 3> initial{1.0, 1.0, 1.0};
  double tolerance = 1e-8;

  void validate() const;
};

std::array<double, 3> lorenz_derivative(const LorenzConfig& cfg, const std::array<double, 3>& u);

/// Integrates over [0, duration] from `u` with an adaptive Dormand-Prince
/// 5(4) pair, starting a fresh step-size sequence for the interval.
std::array<double, 3> lorenz_advance(const LorenzConfig& cfg, std::array<double, 3> u, double duration);

/// Columns x, y, z sampled every dt_out; noise on x only.
Dataset gen_lorenz(const LorenzConfig& cfg);

struct HenonConfig {
  std::size_t n = 3000;
  double sigma_r = 0.0;
  NoiseMode noise_mode = NoiseMode::Iterative;
  std::uint64_t seed = 1;
  std::size_t transient = 1000;

  void validate() const;
};

/// x_t = 1 - 1.4 x_{t-1}^2 + 0.3 x_{t-2}, started from x_{-1} = x_{-2} = 0.
Dataset gen_henon(const HenonConfig& cfg);

}  // namespace noisevar
