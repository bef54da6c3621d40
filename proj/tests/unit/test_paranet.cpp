#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "paraqnn/losses.hpp"
#include "paraqnn/paranet.hpp"

using namespace paraqnn;

namespace {

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Row<double> row(std::initializer_list<double> v) {
  Row<double> r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

Row<double> random_row(SeededRng& rng, Eigen::Index n, double lo, double hi) {
  Row<double> r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = rng.uniform(lo, hi);
  return r;
}

struct Problem {
  ParaNet<double> net;
  Row<double> tau, t_star, y;
  LossWeights w;
};

double composite(const Problem& p) {
  const auto out = p.net.forward(p.tau);
  return paraconsistent_loss(out.t, out.f, p.t_star, p.y, p.w).parts.total;
}

/// Max relative error between analytic and central-difference gradients
/// over every parameter (alpha via its unconstrained entry).
double max_rel_grad_error(Problem p, double h) {
  ParaCache<double> cache;
  const auto out = p.net.forward(p.tau, &cache);
  const auto loss = paraconsistent_loss(out.t, out.f, p.t_star, p.y, p.w);
  const auto g = p.net.backward(cache, loss.d_t, loss.d_f);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double x = p.net.params()[i];
    p.net.params_mut()[i] = x + h;
    const double up = composite(p);
    p.net.params_mut()[i] = x - h;
    const double dn = composite(p);
    p.net.params_mut()[i] = x;
    const double fd = (up - dn) / (2.0 * h);
    // Floor sits above the ~1e-11 round-off of a central difference on an O(0.1) loss.
    const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-6});
    worst = std::max(worst, std::abs(fd - g[i]) / denom);
  }
  return worst;
}

Problem random_problem(std::uint64_t seed) {
  SeededRng rng(seed, "problem");
  NetShape shape;
  const auto depth = 1 + rng.below(3);
  shape.hidden.clear();
  for (std::uint64_t d = 0; d < depth; ++d) shape.hidden.push_back(1 + rng.below(8));
  Problem p{ParaNet<double>::initialized(shape, seed, rng.uniform(0.5, 2.0)), {}, {}, {}, {}};
  auto& prm = p.net.params_mut();
  for (Eigen::Index i = 0; i + 1 < prm.size(); ++i) prm[i] += rng.uniform(-0.3, 0.3);
  prm[prm.size() - 1] = rng.uniform(-0.5, 0.5);
  const auto n = static_cast<Eigen::Index>(3 + rng.below(10));
  p.tau = random_row(rng, n, 0.0, 1.0);
  p.t_star = random_row(rng, n, 0.0, 1.0);
  p.y = random_row(rng, n, -0.2, 1.2);
  p.w = {rng.uniform(0.5, 2.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 5.0)};
  return p;
}

}  // namespace

TEST(Piaf, ZeroPreActivationsGiveOneHalf) {
  const auto out = piaf<double>(row({0.0}), row({0.0}), 6.0, 1.0);
  EXPECT_EQ(out.t[0], 0.5);
  EXPECT_EQ(out.f[0], 0.5);
}

TEST(Piaf, ReferenceValues) {
  const auto out = piaf<double>(row({1.0}), row({0.5}), 6.0, 1.0);
  EXPECT_NEAR(out.t[0], sigma(-2.0), 1e-12);
  EXPECT_NEAR(out.f[0], sigma(0.5), 1e-12);
  EXPECT_NEAR(out.t[0], 0.11920, 1e-5);
  EXPECT_NEAR(out.f[0], 0.62246, 1e-5);
}

TEST(Piaf, AlphaIrrelevantWhenFalsityIsZero) {
  const auto a = piaf<double>(row({0.7, -3.0}), row({0.0, 0.0}), 0.1, 1.0);
  const auto b = piaf<double>(row({0.7, -3.0}), row({0.0, 0.0}), 50.0, 1.0);
  EXPECT_EQ(a.t[0], b.t[0]);
  EXPECT_EQ(a.t[1], b.t[1]);
}

TEST(Piaf, StableAtExtremes) {
  const auto out = piaf<double>(row({1e4, -1e4}), row({-1e4, 1e4}), 6.0, 1.0);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_TRUE(std::isfinite(out.t[i]));
    EXPECT_TRUE(std::isfinite(out.f[i]));
  }
}

TEST(ParaNet, InitialAlphaIsExactlySix) {
  const auto net = ParaNet<double>::initialized(NetShape{}, 42);
  EXPECT_EQ(net.alpha(), 6.0);
  const auto netf = ParaNet<float>::initialized(NetShape{}, 42);
  EXPECT_EQ(netf.alpha(), 6.0f);
}

TEST(ParaNet, GlorotBoundsAndZeroBiases) {
  NetShape s;
  s.hidden = {16, 8};
  const auto net = ParaNet<double>::initialized(s, 42);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const auto v = net.layer(l);
    const double bound = std::sqrt(6.0 / static_cast<double>(v.in + v.out));
    EXPECT_LE(v.w.cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(v.b.cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_EQ(ParaNet<double>::initialized(s, 42).params(), net.params());
  EXPECT_NE(ParaNet<double>::initialized(s, 43).params(), net.params());
}

TEST(ParaNet, ZeroWeightsAreInputIndependent) {
  NetShape s;
  s.hidden = {4, 4};
  const ParaNet<double> net(s);
  const auto out = net.forward(row({0.0, 0.3, 1.0}));
  EXPECT_EQ(out.t[0], out.t[1]);
  EXPECT_EQ(out.t[1], out.t[2]);
  EXPECT_EQ(out.f[0], out.f[2]);
  // All-zero pre-activations: every unit outputs sigmoid(0) = 0.5 into the
  // next layer, whose pre-activations are again 0.
  EXPECT_EQ(out.t[0], 0.5);
}

TEST(ParaNet, OutputsInOpenUnitInterval) {
  NetShape s;
  s.hidden = {8, 8};
  auto net = ParaNet<double>::initialized(s, 3);
  SeededRng rng(5, "test");
  for (Eigen::Index i = 0; i < net.params().size(); ++i) net.params_mut()[i] *= 5.0;
  const auto out = net.forward(random_row(rng, 50, 0.0, 1.0));
  for (Eigen::Index i = 0; i < 50; ++i) {
    EXPECT_GT(out.t[i], 0.0);
    EXPECT_LT(out.t[i], 1.0);
    EXPECT_GT(out.f[i], 0.0);
    EXPECT_LT(out.f[i], 1.0);
  }
}

TEST(ParaNet, BatchInvariance) {
  NetShape s;
  s.hidden = {8, 8, 8};
  const auto net = ParaNet<double>::initialized(s, 11);
  SeededRng rng(1, "test");
  const auto tau = random_row(rng, 33, 0.0, 1.0);
  const auto all = net.forward(tau);
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    const auto one = net.forward(row({tau[i]}));
    EXPECT_NEAR(one.t[0], all.t[i], 1e-15);
    EXPECT_NEAR(one.f[0], all.f[i], 1e-15);
  }
}

TEST(ParaNet, ZeroUpstreamGivesZeroGradient) {
  const auto net = ParaNet<double>::initialized(NetShape{{1}, {4, 4}, 1}, 2);
  ParaCache<double> cache;
  net.forward(row({0.1, 0.9}), &cache);
  const auto g = net.backward(cache, Row<double>::Zero(2), Row<double>::Zero(2));
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ParaNet, SingleNeuronAlphaDerivative) {
  // One output unit fed by (t, f) = (tau, tau) at tau = 1, with weights set
  // so z_t = 1 and z_f = 0.5.
  ParaNet<double> net(NetShape{1, {}, 1});
  auto v = net.layer(0);
  v.w_tt()(0, 0) = 1.0;
  v.w_ff()(0, 0) = 0.5;
  ParaCache<double> cache;
  net.forward(row({1.0}), &cache);
  const auto g = net.backward(cache, row({1.0}), row({0.0}));
  const double s = sigma(-2.0);
  const double d_alpha = g[static_cast<Eigen::Index>(net.alpha_index())] / net.alpha();
  EXPECT_NEAR(d_alpha, -0.5 * s * (1.0 - s), 1e-12);
  EXPECT_NEAR(d_alpha, -0.0525, 5e-6);  // quoted value is rounded

  // Central difference in alpha itself, h = 1e-6.
  auto t_at = [&](double alpha) {
    ParaNet<double> n2 = net;
    n2.params_mut()[static_cast<Eigen::Index>(net.alpha_index())] = std::log(alpha / 6.0);
    return n2.forward(row({1.0})).t[0];
  };
  EXPECT_NEAR((t_at(6.0 + 1e-6) - t_at(6.0 - 1e-6)) / 2e-6, d_alpha, 1e-8);
}

TEST(ParaNet, AlphaGradientVanishesWhenFalsityPreActivationsAreZero) {
  NetShape s;
  s.hidden = {3};
  auto net = ParaNet<double>::initialized(s, 4);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto v = net.layer(l);
    v.w_ft().setZero();
    v.w_ff().setZero();
    v.b_f().setZero();
  }
  ParaCache<double> cache;
  net.forward(row({0.2, 0.7}), &cache);
  const auto g = net.backward(cache, row({0.3, -1.0}), row({2.0, 0.5}));
  EXPECT_EQ(g[static_cast<Eigen::Index>(net.alpha_index())], 0.0);
}

TEST(ParaNet, GradientMatchesFiniteDifferencesOnRandomNets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(seed);
    EXPECT_LT(max_rel_grad_error(p, 1e-5), 1e-4) << "seed " << seed;
  }
}

TEST(ParaNet, TwoLayerWidthFourGradient) {
  Problem p{ParaNet<double>::initialized(NetShape{1, {4}, 1}, 9), row({0.1, 0.5, 0.9}),
            row({0.2, 0.6, 0.4}), row({0.3, 0.5, 0.1}), {}};
  EXPECT_LT(max_rel_grad_error(p, 1e-5), 1e-4);
}

TEST(ParaNet, StaleCacheIsAContractViolation) {
  auto net = ParaNet<double>::initialized(NetShape{1, {4}, 1}, 1);
  ParaCache<double> cache;
  net.forward(row({0.5}), &cache);
  net.params_mut()[0] += 0.1;
  EXPECT_THROW(net.backward(cache, row({1.0}), row({1.0})), ContractError);

  net.forward(row({0.5}), &cache);
  EXPECT_THROW(net.backward(cache, row({1.0, 2.0}), row({1.0, 2.0})), ContractError);
}

TEST(ParaNet, ForwardAndBackwardAreBitReproducible) {
  const auto net = ParaNet<float>::initialized(NetShape{}, 42);
  Row<float> tau = Row<float>::LinSpaced(64, 0.0f, 1.0f);
  ParaCache<float> c1, c2;
  const auto a = net.forward(tau, &c1);
  const auto b = net.forward(tau, &c2);
  EXPECT_TRUE((a.t == b.t).all());
  EXPECT_EQ(net.backward(c1, a.t, a.f), net.backward(c2, b.t, b.f));
}

TEST(ParaNet, RejectsBadShapes) {
  EXPECT_THROW(ParaNet<double>(NetShape{1, {0}, 1}), InputError);
  EXPECT_THROW(ParaNet<double>(NetShape{1, {4}, 2}), InputError);
  EXPECT_THROW(ParaNet<double>(NetShape{}, 0.0), InputError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto net = ParaNet<float>::initialized(NetShape{1, {8, 8}, 1}, 42, 1.5f);
  net.params_mut()[static_cast<Eigen::Index>(net.alpha_index())] = -0.123f;
  const auto text = to_json(net).dump();
  const auto back = paranet_from_json<float>(nlohmann::json::parse(text));
  EXPECT_EQ(back.params(), net.params());
  EXPECT_EQ(back.k(), net.k());
  EXPECT_EQ(back.alpha(), net.alpha());
  EXPECT_EQ(back.shape(), net.shape());
}

TEST(Checkpoint, RejectsMismatches) {
  const auto net = ParaNet<float>::initialized(NetShape{1, {4}, 1}, 42);
  auto j = to_json(net);
  EXPECT_THROW(paranet_from_json<double>(j), DataError);
  j["params"].erase(0);
  EXPECT_THROW(paranet_from_json<float>(j), DataError);
  auto k = to_json(net);
  k["version"] = 99;
  EXPECT_THROW(paranet_from_json<float>(k), DataError);
}
