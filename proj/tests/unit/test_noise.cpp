#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include "paraqnn/noise.hpp"

using namespace paraqnn;

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_std(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// Least-squares slope of log(periodogram) vs log(frequency) over bins
// [k_lo, k_hi], using a direct DFT per bin (independent of the FFT used by
// the generator).
double periodogram_slope(const std::vector<double>& x, std::size_t k_lo, std::size_t k_hi) {
  const std::size_t n = x.size();
  std::vector<double> lx, ly;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    std::complex<double> acc = 0.0;
    // Re-anchor the twiddle every 1024 samples to bound rounding drift.
    for (std::size_t base = 0; base < n; base += 1024) {
      std::complex<double> w = std::polar(1.0, ang * static_cast<double>(base));
      const std::complex<double> step = std::polar(1.0, ang);
      for (std::size_t i = base; i < std::min(n, base + 1024); ++i) {
        acc += x[i] * w;
        w *= step;
      }
    }
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(std::log(std::norm(acc)));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST(GaussianNoise, ZeroSigmaIsZero) {
  SeededRng rng(1, "gaussian");
  for (double v : gaussian_noise(rng, 100, 0.0)) EXPECT_EQ(v, 0.0);
}

TEST(GaussianNoise, MomentsWithinThreeStandardErrors) {
  SeededRng rng(42, "gaussian");
  const auto v = gaussian_noise(rng, 100000, 0.08);
  EXPECT_GE(pop_std(v), 0.0794);
  EXPECT_LE(pop_std(v), 0.0806);
  EXPECT_GE(mean(v), -0.0008);
  EXPECT_LE(mean(v), 0.0008);
}

TEST(TelegraphNoise, DegenerateCases) {
  SeededRng a(1, "telegraph");
  for (double v : telegraph_noise(a, 100, 0.0, 0.3)) EXPECT_EQ(v, 0.0);
  SeededRng b(1, "telegraph");
  const auto constant = telegraph_noise(b, 500, 0.1, 0.0);
  for (double v : constant) EXPECT_EQ(v, constant.front());
  EXPECT_EQ(std::abs(constant.front()), 0.1);
}

TEST(TelegraphNoise, FlipFractionAndSupport) {
  SeededRng rng(42, "telegraph");
  const std::size_t n = 100000;
  const auto v = telegraph_noise(rng, n, 0.1, 0.02);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ASSERT_EQ(std::abs(v[i]), 0.1);
    if (i > 0 && v[i] != v[i - 1]) ++flips;
  }
  const double frac = static_cast<double>(flips) / static_cast<double>(n - 1);
  EXPECT_GE(frac, 0.0187);
  EXPECT_LE(frac, 0.0213);
}

TEST(TelegraphNoise, InitialSignIsAFairCoin) {
  int positive = 0;
  for (std::uint64_t s = 0; s < 400; ++s) {
    SeededRng rng(s, "telegraph");
    if (telegraph_noise(rng, 1, 1.0, 0.0)[0] > 0) ++positive;
  }
  // 3 standard errors of Binomial(400, 0.5) is 30.
  EXPECT_NEAR(positive, 200, 30);
}

TEST(PinkNoise, ExactNormalization) {
  for (std::size_t n : {2u, 3u, 17u, 1000u, 50000u}) {
    SeededRng rng(42, "pink");
    const auto v = pink_noise(rng, n, 0.06);
    EXPECT_NEAR(pop_std(v), 0.06, 1e-12) << n;
    EXPECT_NEAR(mean(v), 0.0, 1e-12) << n;
  }
  SeededRng rng(1, "pink");
  for (double v : pink_noise(rng, 64, 0.0)) EXPECT_EQ(v, 0.0);
}

TEST(PinkNoise, RejectsTooShort) {
  SeededRng rng(1, "pink");
  EXPECT_THROW(pink_noise(rng, 1, 0.06), InputError);
  EXPECT_THROW(pink_noise(rng, 0, 0.06), InputError);
}

TEST(PinkNoise, PeriodogramSlopeIsMinusOne) {
  const std::size_t n = 1u << 16;
  SeededRng rng(42, "pink");
  const auto v = pink_noise(rng, n, 0.06);
  // Two decades centred (in log space) on the usable band [1, n/2].
  const double centre = std::sqrt(static_cast<double>(n / 2));
  const auto lo = static_cast<std::size_t>(centre / 10.0);
  const auto hi = static_cast<std::size_t>(centre * 10.0);
  const double slope = periodogram_slope(v, lo, hi);
  EXPECT_GE(slope, -1.3);
  EXPECT_LE(slope, -0.7);
}

TEST(Spam, AffineConfusion) {
  EXPECT_EQ(apply_spam(0.37, 0.0), 0.37);
  EXPECT_EQ(apply_spam(0.5, 0.02), 0.5);
  EXPECT_NEAR(apply_spam(1.0, 0.02), 0.98, 1e-15);
  EXPECT_NEAR(apply_spam(0.0, 0.02), 0.02, 1e-15);
}

TEST(Corrupt, ZeroStackIsIdentity) {
  const std::vector<double> clean{0.0, 0.25, 0.5, 1.0};
  EXPECT_EQ(corrupt(clean, NoiseStack{}, 42), clean);
}

TEST(Corrupt, SpamOnly) {
  const std::vector<double> clean(100, 1.0);
  NoiseStack s;
  s.spam_epsilon = 0.02;
  for (double v : corrupt(clean, s, 42)) EXPECT_NEAR(v, 0.98, 1e-15);
}

TEST(Corrupt, DeterministicGivenSeed) {
  std::vector<double> clean(2000, 0.5);
  NoiseStack s;
  s.gaussian_sigma = 0.08;
  s.telegraph_amplitude = 0.1;
  s.telegraph_switch_prob = 0.02;
  EXPECT_EQ(corrupt(clean, s, 42), corrupt(clean, s, 42));
  EXPECT_NE(corrupt(clean, s, 42), corrupt(clean, s, 43));
}

TEST(Corrupt, StreamsAreIndependent) {
  std::vector<double> clean(2000, 0.5);
  NoiseStack gauss_only;
  gauss_only.gaussian_sigma = 0.08;
  NoiseStack a = gauss_only;
  a.telegraph_amplitude = 0.1;
  a.telegraph_switch_prob = 0.02;
  NoiseStack b = gauss_only;
  b.telegraph_amplitude = 0.1;
  b.telegraph_switch_prob = 0.3;

  // Removing the telegraph part (same seed, same telegraph sign path when
  // switch_prob matches) must leave exactly the Gaussian part.
  const auto g = corrupt(clean, gauss_only, 9);
  const auto ya = corrupt(clean, a, 9);
  const auto yb = corrupt(clean, b, 9);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_NEAR(std::abs(ya[i] - g[i]), 0.1, 1e-12);
    EXPECT_NEAR(std::abs(yb[i] - g[i]), 0.1, 1e-12);
  }
}

TEST(Corrupt, ClipFlag) {
  std::vector<double> clean(1000, 0.95);
  NoiseStack s;
  s.gaussian_sigma = 0.2;
  s.clip_output = true;
  for (double v : corrupt(clean, s, 3)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(NoiseStack, Validation) {
  NoiseStack s;
  s.spam_epsilon = 0.5;
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.telegraph_switch_prob = 1.5;
  EXPECT_THROW(s.validate(), InputError);
  s = {};
  s.gaussian_sigma = -0.1;
  EXPECT_THROW(s.validate(), InputError);
}
