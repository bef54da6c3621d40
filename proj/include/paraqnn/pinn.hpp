#pragma once

// Physics residuals for the PINN baselines. Time derivatives come from
// central finite differences on a uniform collocation grid of physical time
// (microseconds):
//
//   P'  ~ (P[i+1] - P[i-1]) / (2h)
//   P'' ~ (P[i+1] - 2 P[i] + P[i-1]) / h^2
//
// incomplete prior:  r = P' + gamma P
// known prior:       r = P'' + 2 zeta omega P' + omega^2 (P - P_eq)
//
// The loss is mean(r^2) over the stencil centers.

#include <cmath>
#include <span>
#include <vector>

#include "paraqnn/errors.hpp"

namespace paraqnn {

enum class PhysicsPrior { incomplete, known };

struct PhysicsCoefficients {
  double gamma = 0.2;  // incomplete
  double zeta = 0.1;   // known
  double omega = 2.0;  // known
  double p_eq = 0.5;   // known
};

/// Values of P at the three points of each central stencil.
struct Stencils {
  std::vector<double> minus;
  std::vector<double> center;
  std::vector<double> plus;
  double h = 0.0;

  std::size_t size() const { return center.size(); }
};

struct PhysicsResidual {
  double value = 0.0;
  std::vector<double> d_minus;
  std::vector<double> d_center;
  std::vector<double> d_plus;
  // d value / d coefficient, for the coefficients the prior uses.
  double d_gamma = 0.0;
  double d_zeta = 0.0;
  double d_omega = 0.0;
  double d_p_eq = 0.0;
};

inline PhysicsResidual pinn_residual(const Stencils& s, PhysicsPrior prior,
                                     const PhysicsCoefficients& c) {
  const std::size_t m = s.size();
  if (m == 0 || s.minus.size() != m || s.plus.size() != m)
    throw InputError("pinn_residual: stencil arrays must be non-empty and equal length");
  if (!(s.h > 0.0)) throw InputError("pinn_residual: spacing must be > 0");
  PhysicsResidual out;
  out.d_minus.resize(m);
  out.d_center.resize(m);
  out.d_plus.resize(m);
  const double h = s.h;
  const double inv_m = 1.0 / static_cast<double>(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d1 = (s.plus[i] - s.minus[i]) / (2.0 * h);
    if (prior == PhysicsPrior::incomplete) {
      const double r = d1 + c.gamma * s.center[i];
      acc += r * r;
      const double g = 2.0 * r * inv_m;
      out.d_plus[i] = g / (2.0 * h);
      out.d_minus[i] = -g / (2.0 * h);
      out.d_center[i] = g * c.gamma;
      out.d_gamma += g * s.center[i];
    } else {
      const double d2 = (s.plus[i] - 2.0 * s.center[i] + s.minus[i]) / (h * h);
      const double dev = s.center[i] - c.p_eq;
      const double r = d2 + 2.0 * c.zeta * c.omega * d1 + c.omega * c.omega * dev;
      acc += r * r;
      const double g = 2.0 * r * inv_m;
      const double damp = 2.0 * c.zeta * c.omega;
      out.d_plus[i] = g * (1.0 / (h * h) + damp / (2.0 * h));
      out.d_minus[i] = g * (1.0 / (h * h) - damp / (2.0 * h));
      out.d_center[i] = g * (-2.0 / (h * h) + c.omega * c.omega);
      out.d_zeta += g * 2.0 * c.omega * d1;
      out.d_omega += g * (2.0 * c.zeta * d1 + 2.0 * c.omega * dev);
      out.d_p_eq += -g * c.omega * c.omega;
    }
  }
  out.value = acc * inv_m;
  return out;
}

/// Residual over every interior point of a uniformly sampled trajectory.
inline PhysicsResidual pinn_residual(std::span<const double> values, double h, PhysicsPrior prior,
                                     const PhysicsCoefficients& c) {
  if (values.size() < 3) throw InputError("pinn_residual: grid needs at least 3 points");
  Stencils s;
  s.h = h;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    s.minus.push_back(values[i - 1]);
    s.center.push_back(values[i]);
    s.plus.push_back(values[i + 1]);
  }
  return pinn_residual(s, prior, c);
}

}  // namespace paraqnn
