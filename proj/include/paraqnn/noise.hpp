#pragma once

// Seeded corruption processes applied to clean population trajectories.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "paraqnn/errors.hpp"
#include "paraqnn/rng.hpp"

namespace paraqnn {

struct NoiseStack {
  double gaussian_sigma = 0.0;
  double telegraph_amplitude = 0.0;
  double telegraph_switch_prob = 0.0;  // per sample
  double pink_sigma = 0.0;
  double spam_epsilon = 0.0;
  bool clip_output = false;

  void validate() const {
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (!finite_nonneg(gaussian_sigma) || !finite_nonneg(telegraph_amplitude) ||
        !finite_nonneg(pink_sigma))
      throw InputError("NoiseStack: magnitudes must be finite and >= 0");
    if (!(telegraph_switch_prob >= 0.0 && telegraph_switch_prob <= 1.0))
      throw InputError("NoiseStack: telegraph_switch_prob must lie in [0, 1]");
    if (!(spam_epsilon >= 0.0 && spam_epsilon < 0.5))
      throw InputError("NoiseStack: spam_epsilon must lie in [0, 0.5)");
  }

  friend bool operator==(const NoiseStack&, const NoiseStack&) = default;
};

inline std::vector<double> gaussian_noise(SeededRng& rng, std::size_t n, double sigma) {
  if (!(sigma >= 0.0)) throw InputError("gaussian_noise: sigma must be >= 0");
  std::vector<double> out(n, 0.0);
  if (sigma == 0.0) return out;
  for (auto& v : out) v = sigma * rng.normal();
  return out;
}

/// Symmetric two-state Markov chain over {-amplitude, +amplitude}.
inline std::vector<double> telegraph_noise(SeededRng& rng, std::size_t n, double amplitude,
                                           double switch_prob) {
  if (!(amplitude >= 0.0)) throw InputError("telegraph_noise: amplitude must be >= 0");
  if (!(switch_prob >= 0.0 && switch_prob <= 1.0))
    throw InputError("telegraph_noise: switch_prob must lie in [0, 1]");
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  out[0] = sign * amplitude;
  for (std::size_t i = 1; i < n; ++i) {
    if (rng.uniform() < switch_prob) sign = -sign;
    out[i] = sign * amplitude;
  }
  return out;
}

/// 1/f noise by spectral shaping of white Gaussian noise. The result has
/// zero mean and a sample standard deviation of exactly sigma (up to
/// rounding).
inline std::vector<double> pink_noise(SeededRng& rng, std::size_t n, double sigma) {
  if (n < 2) throw InputError("pink_noise: need at least 2 samples");
  if (!(sigma >= 0.0)) throw InputError("pink_noise: sigma must be >= 0");
  if (sigma == 0.0) return std::vector<double>(n, 0.0);

  std::vector<double> white(n);
  for (auto& v : white) v = rng.normal();

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, white);
  spectrum[0] = 0.0;
  const double nd = static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    // Bins above n/2 mirror negative frequencies.
    const double freq = static_cast<double>(std::min(k, n - k)) / nd;
    spectrum[k] *= 1.0 / std::sqrt(freq);
  }
  std::vector<double> shaped;
  fft.inv(shaped, spectrum);

  const double mean = std::accumulate(shaped.begin(), shaped.end(), 0.0) / nd;
  for (auto& v : shaped) v -= mean;
  double ss = 0.0;
  for (double v : shaped) ss += v * v;
  const double scale = sigma / std::sqrt(ss / nd);
  for (auto& v : shaped) v *= scale;
  return shaped;
}

/// Symmetric readout confusion: each outcome is misassigned with
/// probability epsilon.
inline double apply_spam(double p, double epsilon) { return epsilon + (1.0 - 2.0 * epsilon) * p; }

/// y = spam(clean) + gaussian + telegraph + pink. Each component has its
/// own stream, so e.g. changing telegraph settings leaves the Gaussian
/// samples untouched.
inline std::vector<double> corrupt(std::span<const double> clean, const NoiseStack& stack,
                                   std::uint64_t seed) {
  stack.validate();
  const std::size_t n = clean.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = apply_spam(clean[i], stack.spam_epsilon);

  auto add = [&](const std::vector<double>& component) {
    for (std::size_t i = 0; i < n; ++i) y[i] += component[i];
  };
  if (stack.gaussian_sigma > 0.0) {
    SeededRng rng(seed, "gaussian");
    add(gaussian_noise(rng, n, stack.gaussian_sigma));
  }
  if (stack.telegraph_amplitude > 0.0) {
    SeededRng rng(seed, "telegraph");
    add(telegraph_noise(rng, n, stack.telegraph_amplitude, stack.telegraph_switch_prob));
  }
  if (stack.pink_sigma > 0.0) {
    SeededRng rng(seed, "pink");
    add(pink_noise(rng, n, stack.pink_sigma));
  }
  if (stack.clip_output) {
    for (auto& v : y) v = std::clamp(v, 0.0, 1.0);
  }
  return y;
}

}  // namespace paraqnn
