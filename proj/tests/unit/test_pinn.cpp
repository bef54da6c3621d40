#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "paraqnn/pinn.hpp"
#include "paraqnn/rng.hpp"

using namespace paraqnn;

namespace {

std::vector<double> sample(double (*f)(double, double), double p, double h, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(static_cast<double>(i) * h, p);
  return v;
}

}  // namespace

TEST(PinnResidual, ExponentialDecaySolvesIncompletePrior) {
  const double h = 1e-3;
  const auto v = sample([](double t, double g) { return std::exp(-g * t); }, 0.2, h, 5001);
  PhysicsCoefficients c;
  c.gamma = 0.2;
  EXPECT_LT(pinn_residual(v, h, PhysicsPrior::incomplete, c).value, 1e-4);
  c.gamma = 0.5;
  EXPECT_GT(pinn_residual(v, h, PhysicsPrior::incomplete, c).value, 1e-3);
}

TEST(PinnResidual, EquilibriumSolvesKnownPrior) {
  const std::vector<double> v(100, 0.37);
  PhysicsCoefficients c;
  c.p_eq = 0.37;
  EXPECT_NEAR(pinn_residual(v, 0.01, PhysicsPrior::known, c).value, 0.0, 1e-20);
}

TEST(PinnResidual, HarmonicSolvesUndampedKnownPrior) {
  const double h = 1e-3;
  const auto v = sample([](double t, double w) { return std::cos(w * t); }, 2.0, h, 5001);
  PhysicsCoefficients c;
  c.zeta = 0.0;
  c.omega = 2.0;
  c.p_eq = 0.0;
  EXPECT_LT(pinn_residual(v, h, PhysicsPrior::known, c).value, 1e-3);
}

TEST(PinnResidual, TooFewPointsIsAnError) {
  const std::vector<double> v{0.1, 0.2};
  EXPECT_THROW(pinn_residual(v, 0.1, PhysicsPrior::incomplete, {}), InputError);
  Stencils s;
  s.h = 0.1;
  EXPECT_THROW(pinn_residual(s, PhysicsPrior::known, {}), InputError);
}

TEST(PinnResidual, GradientsMatchFiniteDifferences) {
  SeededRng rng(8, "test");
  Stencils s;
  s.h = 0.05;
  for (int i = 0; i < 9; ++i) {
    s.minus.push_back(rng.uniform());
    s.center.push_back(rng.uniform());
    s.plus.push_back(rng.uniform());
  }
  const PhysicsCoefficients c{0.3, 0.15, 1.7, 0.4};
  const double e = 1e-6;
  for (auto prior : {PhysicsPrior::incomplete, PhysicsPrior::known}) {
    const auto r = pinn_residual(s, prior, c);
    auto fd_value = [&](auto mutate) {
      Stencils sp = s, sm = s;
      PhysicsCoefficients cp = c, cm = c;
      mutate(sp, cp, e);
      mutate(sm, cm, -e);
      return (pinn_residual(sp, prior, cp).value - pinn_residual(sm, prior, cm).value) / (2 * e);
    };
    auto near = [](double a, double b) { return std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(b)); };
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_TRUE(near(r.d_minus[i], fd_value([&](Stencils& x, PhysicsCoefficients&, double d) { x.minus[i] += d; })));
      EXPECT_TRUE(near(r.d_center[i], fd_value([&](Stencils& x, PhysicsCoefficients&, double d) { x.center[i] += d; })));
      EXPECT_TRUE(near(r.d_plus[i], fd_value([&](Stencils& x, PhysicsCoefficients&, double d) { x.plus[i] += d; })));
    }
    if (prior == PhysicsPrior::incomplete) {
      EXPECT_TRUE(near(r.d_gamma, fd_value([](Stencils&, PhysicsCoefficients& k, double d) { k.gamma += d; })));
    } else {
      EXPECT_TRUE(near(r.d_zeta, fd_value([](Stencils&, PhysicsCoefficients& k, double d) { k.zeta += d; })));
      EXPECT_TRUE(near(r.d_omega, fd_value([](Stencils&, PhysicsCoefficients& k, double d) { k.omega += d; })));
      EXPECT_TRUE(near(r.d_p_eq, fd_value([](Stencils&, PhysicsCoefficients& k, double d) { k.p_eq += d; })));
    }
  }
}
