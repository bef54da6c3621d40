#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "paraqnn/errors.hpp"
#include "paraqnn/paranet.hpp"

namespace paraqnn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

template <typename Scalar>
struct AdamState {
  Vec<Scalar> m;
  Vec<Scalar> v;
  std::uint64_t step = 0;

  explicit AdamState(Eigen::Index n = 0) : m(Vec<Scalar>::Zero(n)), v(Vec<Scalar>::Zero(n)) {}
};

/// One bias-corrected Adam update, in place. Throws TrainingError on a
/// non-finite gradient before touching the parameters.
template <typename Scalar>
void adam_step(Vec<Scalar>& params, const Vec<Scalar>& grads, AdamState<Scalar>& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size())
    throw InputError("adam_step: shape mismatch");
  if (!grads.allFinite()) {
    Eigen::Index bad = 0;
    for (; bad < grads.size() && std::isfinite(grads[bad]); ++bad) {
    }
    throw TrainingError("adam_step: non-finite gradient at parameter " + std::to_string(bad));
  }
  ++state.step;
  const auto t = static_cast<double>(state.step);
  const auto b1 = static_cast<Scalar>(cfg.beta1);
  const auto b2 = static_cast<Scalar>(cfg.beta2);
  const auto c1 = static_cast<Scalar>(1.0 - std::pow(cfg.beta1, t));
  const auto c2 = static_cast<Scalar>(1.0 - std::pow(cfg.beta2, t));
  const auto lr = static_cast<Scalar>(cfg.learning_rate);
  const auto eps = static_cast<Scalar>(cfg.eps);
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const Scalar g = grads[i];
    state.m[i] = b1 * state.m[i] + (Scalar(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (Scalar(1) - b2) * g * g;
    const Scalar m_hat = state.m[i] / c1;
    const Scalar v_hat = state.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace paraqnn
