#pragma once

// Paraconsistent loss terms with exact gradients with respect to the
// network outputs (t_hat, f_hat). Values are accumulated in double.

#include <algorithm>
#include <cmath>

#include "paraqnn/errors.hpp"
#include "paraqnn/paranet.hpp"

namespace paraqnn {

struct LossWeights {
  double lambda_s = 1.0;
  double lambda_n = 0.5;
  double lambda_c = 0.5;

  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

template <typename Scalar>
struct LossGrad {
  double value = 0.0;
  Row<Scalar> d_t;  // d value / d t_hat (empty when the term ignores t_hat)
  Row<Scalar> d_f;  // d value / d f_hat
};

namespace detail {

template <typename Scalar>
void require_batch(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a == 0) throw InputError(std::string(what) + ": empty batch");
  if (a != b) throw InputError(std::string(what) + ": length mismatch");
}

}  // namespace detail

/// (1/N) sum (t_hat - t_star)^2
template <typename Scalar>
LossGrad<Scalar> loss_signal(const Row<Scalar>& t_hat, const Row<Scalar>& t_star) {
  detail::require_batch<Scalar>(t_hat.size(), t_star.size(), "loss_signal");
  const auto n = static_cast<double>(t_hat.size());
  LossGrad<Scalar> out;
  out.d_t.resize(t_hat.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t_hat.size(); ++i) {
    const double r = static_cast<double>(t_hat[i]) - static_cast<double>(t_star[i]);
    acc += r * r;
    out.d_t[i] = static_cast<Scalar>(2.0 * r / n);
  }
  out.value = acc / n;
  return out;
}

/// (1/N) sum (f_hat - |y - t_star|)^2
template <typename Scalar>
LossGrad<Scalar> loss_noise(const Row<Scalar>& f_hat, const Row<Scalar>& y, const Row<Scalar>& t_star) {
  detail::require_batch<Scalar>(f_hat.size(), y.size(), "loss_noise");
  detail::require_batch<Scalar>(f_hat.size(), t_star.size(), "loss_noise");
  const auto n = static_cast<double>(f_hat.size());
  LossGrad<Scalar> out;
  out.d_f.resize(f_hat.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < f_hat.size(); ++i) {
    const double target = std::abs(static_cast<double>(y[i]) - static_cast<double>(t_star[i]));
    const double r = static_cast<double>(f_hat[i]) - target;
    acc += r * r;
    out.d_f[i] = static_cast<Scalar>(2.0 * r / n);
  }
  out.value = acc / n;
  return out;
}

/// (1/N) sum max(0, t_hat + f_hat - 1)^2
template <typename Scalar>
LossGrad<Scalar> loss_contradiction(const Row<Scalar>& t_hat, const Row<Scalar>& f_hat) {
  detail::require_batch<Scalar>(t_hat.size(), f_hat.size(), "loss_contradiction");
  const auto n = static_cast<double>(t_hat.size());
  LossGrad<Scalar> out;
  out.d_t.resize(t_hat.size());
  out.d_f.resize(t_hat.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < t_hat.size(); ++i) {
    const double excess =
        std::max(0.0, static_cast<double>(t_hat[i]) + static_cast<double>(f_hat[i]) - 1.0);
    acc += excess * excess;
    const auto g = static_cast<Scalar>(2.0 * excess / n);
    out.d_t[i] = g;
    out.d_f[i] = g;
  }
  out.value = acc / n;
  return out;
}

struct LossComponents {
  double signal = 0.0;
  double noise = 0.0;
  double contradiction = 0.0;
  double total = 0.0;
};

template <typename Scalar>
struct CompositeLoss {
  LossComponents parts;
  Row<Scalar> d_t;
  Row<Scalar> d_f;
};

/// lambda_s L_signal + lambda_n L_noise + lambda_c L_contradiction, using
/// the clean latent trajectory t_star as reference.
template <typename Scalar>
CompositeLoss<Scalar> paraconsistent_loss(const Row<Scalar>& t_hat, const Row<Scalar>& f_hat,
                                          const Row<Scalar>& t_star, const Row<Scalar>& y,
                                          const LossWeights& w) {
  const auto s = loss_signal(t_hat, t_star);
  const auto nz = loss_noise(f_hat, y, t_star);
  const auto c = loss_contradiction(t_hat, f_hat);
  CompositeLoss<Scalar> out;
  out.parts = {s.value, nz.value, c.value,
               w.lambda_s * s.value + w.lambda_n * nz.value + w.lambda_c * c.value};
  const auto ls = static_cast<Scalar>(w.lambda_s);
  const auto ln = static_cast<Scalar>(w.lambda_n);
  const auto lc = static_cast<Scalar>(w.lambda_c);
  out.d_t = ls * s.d_t + lc * c.d_t;
  out.d_f = ln * nz.d_f + lc * c.d_f;
  return out;
}

/// Ground-truth-free objective for measured data:
///   lambda_s mean(t_hat - y)^2
/// + lambda_n mean(f_hat - |y - stop_grad(t_hat)|)^2
/// + lambda_c L_contradiction.
/// The residual target is treated as a constant, so the noise term sends
/// no gradient into t_hat.
template <typename Scalar>
CompositeLoss<Scalar> loss_experimental(const Row<Scalar>& t_hat, const Row<Scalar>& f_hat,
                                        const Row<Scalar>& y, const LossWeights& w) {
  const auto fit = loss_signal(t_hat, y);
  const auto nz = loss_noise(f_hat, y, t_hat);  // t_hat enters only as a constant target
  const auto c = loss_contradiction(t_hat, f_hat);
  CompositeLoss<Scalar> out;
  out.parts = {fit.value, nz.value, c.value,
               w.lambda_s * fit.value + w.lambda_n * nz.value + w.lambda_c * c.value};
  const auto ls = static_cast<Scalar>(w.lambda_s);
  const auto ln = static_cast<Scalar>(w.lambda_n);
  const auto lc = static_cast<Scalar>(w.lambda_c);
  out.d_t = ls * fit.d_t + lc * c.d_t;
  out.d_f = ln * nz.d_f + lc * c.d_f;
  return out;
}

}  // namespace paraqnn
