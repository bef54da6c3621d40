#pragma once

// PINN-Incomplete, PINN-Known and plain-MLP baselines. All three share the
// tanh body (3 x 128 by default) and the training loop of ParaQNN; they fit
// the noisy observations directly.
//
// Flat parameter layout: [body params..., physics params...]
//   incomplete: u_gamma                      gamma = gamma0 * exp(u_gamma)
//   known:      u_zeta, u_omega, v_eq        zeta = zeta0 * exp(u_zeta),
//                                            omega = omega0 * exp(u_omega),
//                                            P_eq = sigmoid(v_eq + logit(P_eq0))

#include <array>
#include <cmath>
#include <limits>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "paraqnn/errors.hpp"
#include "paraqnn/pinn.hpp"
#include "paraqnn/rng.hpp"
#include "paraqnn/tanhnet.hpp"
#include "paraqnn/training.hpp"

namespace paraqnn {

enum class ModelKind { paraqnn, pinn_incomplete, pinn_known, mlp };

inline constexpr std::array<ModelKind, 4> kAllModels = {
    ModelKind::paraqnn, ModelKind::pinn_incomplete, ModelKind::pinn_known, ModelKind::mlp};

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::paraqnn: return "paraqnn";
    case ModelKind::pinn_incomplete: return "pinn-incomplete";
    case ModelKind::pinn_known: return "pinn-known";
    case ModelKind::mlp: return "mlp";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : kAllModels)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct BaselineSpec {
  ModelKind kind = ModelKind::mlp;
  NetShape body;
  double lambda_physics = 0.0;
  PhysicsCoefficients physics_init;
  std::size_t collocation_points = 1024;
  std::size_t collocation_batch = 64;

  static BaselineSpec from(ModelKind kind, const TrainConfig& cfg) {
    if (kind == ModelKind::paraqnn) throw InputError("BaselineSpec: paraqnn is not a baseline");
    BaselineSpec s;
    s.kind = kind;
    s.body = cfg.shape;
    s.lambda_physics = kind == ModelKind::mlp ? 0.0 : cfg.lambda_physics;
    s.physics_init = cfg.physics_init;
    s.collocation_points = cfg.collocation_points;
    s.collocation_batch = cfg.collocation_batch;
    return s;
  }

  std::size_t physics_param_count() const {
    switch (kind) {
      case ModelKind::pinn_incomplete: return 1;
      case ModelKind::pinn_known: return 3;
      default: return 0;
    }
  }
};

template <typename Scalar = double>
class BaselineModel {
 public:
  BaselineModel(BaselineSpec spec, std::uint64_t seed)
      : spec_(std::move(spec)),
        body_(TanhNet<Scalar>::initialized(spec_.body, seed)),
        collocation_rng_(seed, "collocation") {
    const auto nb = body_.num_params();
    params_ = Vec<Scalar>::Zero(static_cast<Eigen::Index>(nb + spec_.physics_param_count()));
    params_.head(static_cast<Eigen::Index>(nb)) = body_.params();
  }

  const BaselineSpec& spec() const { return spec_; }

  /// Physical time corresponding to tau = 1 (the dataset span).
  void set_time_scale(double span) {
    if (!(span > 0.0)) throw InputError("BaselineModel: time scale must be > 0");
    time_scale_ = span;
  }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  const Vec<Scalar>& params() const { return params_; }
  Vec<Scalar>& params_mut() { return params_; }
  double alpha() const { return std::numeric_limits<double>::quiet_NaN(); }

  PhysicsCoefficients physics() const {
    PhysicsCoefficients c = spec_.physics_init;
    const auto nb = static_cast<Eigen::Index>(body_.num_params());
    if (spec_.kind == ModelKind::pinn_incomplete) {
      c.gamma = spec_.physics_init.gamma * std::exp(static_cast<double>(params_[nb]));
    } else if (spec_.kind == ModelKind::pinn_known) {
      c.zeta = spec_.physics_init.zeta * std::exp(static_cast<double>(params_[nb]));
      c.omega = spec_.physics_init.omega * std::exp(static_cast<double>(params_[nb + 1]));
      const double p0 = spec_.physics_init.p_eq;
      const double v = static_cast<double>(params_[nb + 2]) + std::log(p0 / (1.0 - p0));
      c.p_eq = stable_sigmoid(v);
    }
    return c;
  }

  Row<Scalar> predict(const Row<Scalar>& tau) const {
    return body_.forward_with(params_.data(), tau);
  }

  /// Data MSE against the noisy observations plus lambda_physics times the
  /// physics residual on a random subset of collocation stencils.
  double loss_and_grad(const Batch<Scalar>& b, Vec<Scalar>& grad) {
    grad = Vec<Scalar>::Zero(params_.size());
    TanhCache<Scalar> cache;
    const auto p = body_.forward_with(params_.data(), b.tau, &cache);
    const auto data = loss_signal(p, b.y_noisy);
    body_.backward_into(params_.data(), grad.data(), cache, data.d_t);
    double total = data.value;
    if (spec_.lambda_physics > 0.0) {
      const auto centers = sample_centers();
      total += spec_.lambda_physics * physics_term(centers, b, &grad);
    }
    return total;
  }

  /// Same objective, with the residual averaged over the whole collocation
  /// grid. No gradient, no randomness.
  double loss(const Batch<Scalar>& b) const {
    const auto p = predict(b.tau);
    double total = loss_signal(p, b.y_noisy).value;
    if (spec_.lambda_physics > 0.0) {
      std::vector<std::size_t> centers;
      for (std::size_t i = 1; i + 1 < spec_.collocation_points; ++i) centers.push_back(i);
      total += spec_.lambda_physics * physics_term(centers, b, nullptr);
    }
    return total;
  }

  nlohmann::json checkpoint() const {
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"kind", to_string(spec_.kind)},
            {"scalar", scalar_name<Scalar>()},
            {"shape", to_json(spec_.body)},
            {"lambda_physics", spec_.lambda_physics},
            {"physics_init",
             {{"gamma", spec_.physics_init.gamma},
              {"zeta", spec_.physics_init.zeta},
              {"omega", spec_.physics_init.omega},
              {"p_eq", spec_.physics_init.p_eq}}},
            {"params", params_to_json(params_)}};
  }

 private:
  std::vector<std::size_t> sample_centers() {
    std::vector<std::size_t> centers(spec_.collocation_batch);
    const std::uint64_t interior = spec_.collocation_points - 2;
    for (auto& c : centers) c = 1 + static_cast<std::size_t>(collocation_rng_.below(interior));
    return centers;
  }

  double physics_term(const std::vector<std::size_t>& centers, const Batch<Scalar>& b,
                      Vec<Scalar>* grad) const {
    if (!(b.time_hi > b.time_lo)) throw InputError("BaselineModel: empty training time range");
    const double h = (b.time_hi - b.time_lo) / static_cast<double>(spec_.collocation_points - 1);
    const std::size_t m = centers.size();
    const auto mi = static_cast<Eigen::Index>(m);
    Row<Scalar> tau(3 * mi);
    for (std::size_t i = 0; i < m; ++i) {
      const double tc = b.time_lo + static_cast<double>(centers[i]) * h;
      const auto ii = static_cast<Eigen::Index>(i);
      tau[ii] = static_cast<Scalar>((tc - h) / time_scale_);
      tau[mi + ii] = static_cast<Scalar>(tc / time_scale_);
      tau[2 * mi + ii] = static_cast<Scalar>((tc + h) / time_scale_);
    }
    TanhCache<Scalar> cache;
    const auto p = body_.forward_with(params_.data(), tau, grad ? &cache : nullptr);
    Stencils s;
    s.h = h;
    s.minus.resize(m);
    s.center.resize(m);
    s.plus.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      s.minus[i] = static_cast<double>(p[ii]);
      s.center[i] = static_cast<double>(p[mi + ii]);
      s.plus[i] = static_cast<double>(p[2 * mi + ii]);
    }
    const auto prior = spec_.kind == ModelKind::pinn_incomplete ? PhysicsPrior::incomplete
                                                                : PhysicsPrior::known;
    const auto coeffs = physics();
    const auto r = pinn_residual(s, prior, coeffs);
    if (grad) {
      const double lam = spec_.lambda_physics;
      Row<Scalar> d(3 * mi);
      for (std::size_t i = 0; i < m; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        d[ii] = static_cast<Scalar>(lam * r.d_minus[i]);
        d[mi + ii] = static_cast<Scalar>(lam * r.d_center[i]);
        d[2 * mi + ii] = static_cast<Scalar>(lam * r.d_plus[i]);
      }
      body_.backward_into(params_.data(), grad->data(), cache, d);
      const auto nb = static_cast<Eigen::Index>(body_.num_params());
      if (prior == PhysicsPrior::incomplete) {
        (*grad)[nb] = static_cast<Scalar>(lam * r.d_gamma * coeffs.gamma);
      } else {
        (*grad)[nb] = static_cast<Scalar>(lam * r.d_zeta * coeffs.zeta);
        (*grad)[nb + 1] = static_cast<Scalar>(lam * r.d_omega * coeffs.omega);
        (*grad)[nb + 2] = static_cast<Scalar>(lam * r.d_p_eq * coeffs.p_eq * (1.0 - coeffs.p_eq));
      }
    }
    return r.value;
  }

  BaselineSpec spec_;
  TanhNet<Scalar> body_;
  Vec<Scalar> params_;
  SeededRng collocation_rng_;
  double time_scale_ = 1.0;
};

template <typename Scalar = double>
BaselineModel<Scalar> build_baseline(const BaselineSpec& spec, std::uint64_t seed,
                                     double time_scale) {
  BaselineModel<Scalar> m(spec, seed);
  m.set_time_scale(time_scale);
  return m;
}

}  // namespace paraqnn
