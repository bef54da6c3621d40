#pragma once

// Mini-batch training loop, the ParaQNN objective, and telemetry.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "paraqnn/adam.hpp"
#include "paraqnn/dataset.hpp"
#include "paraqnn/errors.hpp"
#include "paraqnn/io.hpp"
#include "paraqnn/losses.hpp"
#include "paraqnn/paranet.hpp"
#include "paraqnn/pinn.hpp"
#include "paraqnn/rng.hpp"

namespace paraqnn {

enum class TrainMode { benchmark, experimental };

inline const char* to_string(TrainMode m) {
  return m == TrainMode::benchmark ? "benchmark" : "experimental";
}

inline std::optional<TrainMode> parse_train_mode(std::string_view s) {
  if (s == "benchmark") return TrainMode::benchmark;
  if (s == "experimental") return TrainMode::experimental;
  return std::nullopt;
}

struct TrainConfig {
  AdamConfig adam;
  std::size_t epochs = 1500;
  std::size_t batch_size = 256;
  std::uint64_t model_seed = 42;
  NetShape shape;
  double k = 1.0;
  double alpha0 = 6.0;
  LossWeights weights;
  TrainMode mode = TrainMode::benchmark;
  // Baselines only.
  double lambda_physics = 0.1;
  std::size_t collocation_points = 1024;
  std::size_t collocation_batch = 64;
  PhysicsCoefficients physics_init;

  void validate() const {
    if (epochs == 0) throw InputError("TrainConfig: epochs must be >= 1");
    if (batch_size == 0) throw InputError("TrainConfig: batch_size must be >= 1");
    if (!(adam.learning_rate > 0.0)) throw InputError("TrainConfig: learning rate must be > 0");
    if (!(k > 0.0) || !(alpha0 > 0.0)) throw InputError("TrainConfig: k and alpha0 must be > 0");
    if (weights.lambda_s < 0 || weights.lambda_n < 0 || weights.lambda_c < 0)
      throw InputError("TrainConfig: loss weights must be >= 0");
    if (lambda_physics < 0.0) throw InputError("TrainConfig: lambda_physics must be >= 0");
    if (collocation_points < 3 || collocation_batch == 0)
      throw InputError("TrainConfig: collocation grid needs >= 3 points and a nonzero batch");
  }

  friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.adam == b.adam && a.epochs == b.epochs && a.batch_size == b.batch_size &&
           a.model_seed == b.model_seed && a.shape == b.shape && a.k == b.k &&
           a.alpha0 == b.alpha0 && a.weights == b.weights && a.mode == b.mode &&
           a.lambda_physics == b.lambda_physics && a.collocation_points == b.collocation_points &&
           a.collocation_batch == b.collocation_batch;
  }
};

inline std::size_t preset_epochs(Regime r) {
  switch (r) {
    case Regime::rabi: return 1500;
    case Regime::lindblad: return 2000;
    case Regime::mixed: return 4000;
  }
  return 0;
}

inline TrainConfig preset_train_config(Regime regime, std::uint64_t model_seed = 42,
                                       double scale = 1.0) {
  TrainConfig c;
  c.model_seed = model_seed;
  c.epochs = scaled_count(preset_epochs(regime), scale, 2);
  c.batch_size = regime == Regime::mixed ? 512 : 256;
  if (regime == Regime::mixed) c.weights.lambda_n = 0.8;
  return c;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.adam.learning_rate},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"model_seed", c.model_seed},
          {"shape", to_json(c.shape)},
          {"k", c.k},
          {"alpha0", c.alpha0},
          {"loss_weights",
           {{"lambda_s", c.weights.lambda_s},
            {"lambda_n", c.weights.lambda_n},
            {"lambda_c", c.weights.lambda_c}}},
          {"mode", to_string(c.mode)},
          {"lambda_physics", c.lambda_physics},
          {"collocation_points", c.collocation_points},
          {"collocation_batch", c.collocation_batch},
          {"physics_init",
           {{"gamma", c.physics_init.gamma},
            {"zeta", c.physics_init.zeta},
            {"omega", c.physics_init.omega},
            {"p_eq", c.physics_init.p_eq}}}};
}

// ---------------------------------------------------------------------------
// Batches

template <typename Scalar>
struct Batch {
  Row<Scalar> tau;
  Row<Scalar> y_clean;
  Row<Scalar> y_noisy;
  double time_lo = 0.0;  // physical time range of the training split (us)
  double time_hi = 0.0;

  Eigen::Index size() const { return tau.size(); }
};

template <typename Scalar>
Batch<Scalar> gather(const Dataset& ds, std::span<const std::size_t> idx) {
  Batch<Scalar> b;
  const auto n = static_cast<Eigen::Index>(idx.size());
  b.tau.resize(n);
  b.y_clean.resize(n);
  b.y_noisy.resize(n);
  const double span = ds.config.time_span();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = idx[static_cast<std::size_t>(i)];
    b.tau[i] = static_cast<Scalar>(ds.times[j] / span);
    b.y_clean[i] = static_cast<Scalar>(ds.y_clean[j]);
    b.y_noisy[i] = static_cast<Scalar>(ds.y_noisy[j]);
  }
  return b;
}

// ---------------------------------------------------------------------------
// ParaQNN objective

template <typename Scalar = double>
class ParaQnnModel {
 public:
  ParaQnnModel(ParaNet<Scalar> net, LossWeights weights, TrainMode mode)
      : net_(std::move(net)), weights_(weights), mode_(mode) {}

  static ParaQnnModel build(const TrainConfig& cfg) {
    return ParaQnnModel(ParaNet<Scalar>::initialized(cfg.shape, cfg.model_seed,
                                                     static_cast<Scalar>(cfg.k),
                                                     static_cast<Scalar>(cfg.alpha0)),
                        cfg.weights, cfg.mode);
  }

  const ParaNet<Scalar>& net() const { return net_; }
  ParaNet<Scalar>& net() { return net_; }
  Vec<Scalar>& params_mut() { return net_.params_mut(); }
  std::size_t num_params() const { return net_.num_params(); }
  double alpha() const { return static_cast<double>(net_.alpha()); }

  CompositeLoss<Scalar> objective(const DualRows<Scalar>& out, const Batch<Scalar>& b) const {
    return mode_ == TrainMode::benchmark
               ? paraconsistent_loss(out.t, out.f, b.y_clean, b.y_noisy, weights_)
               : loss_experimental(out.t, out.f, b.y_noisy, weights_);
  }

  double loss_and_grad(const Batch<Scalar>& b, Vec<Scalar>& grad) const {
    ParaCache<Scalar> cache;
    const auto out = net_.forward(b.tau, &cache);
    const auto loss = objective(out, b);
    grad = net_.backward(cache, loss.d_t, loss.d_f);
    return loss.parts.total;
  }

  double loss(const Batch<Scalar>& b) const { return objective(net_.forward(b.tau), b).parts.total; }

  DualRows<Scalar> predict_dual(const Row<Scalar>& tau) const { return net_.forward(tau); }

  nlohmann::json checkpoint() const {
    auto j = to_json(net_);
    j["loss_weights"] = {{"lambda_s", weights_.lambda_s},
                         {"lambda_n", weights_.lambda_n},
                         {"lambda_c", weights_.lambda_c}};
    j["mode"] = to_string(mode_);
    return j;
  }

 private:
  ParaNet<Scalar> net_;
  LossWeights weights_;
  TrainMode mode_;
};

// ---------------------------------------------------------------------------
// Loop

struct Telemetry {
  std::vector<std::size_t> epoch;
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> alpha;
  double wall_clock_s = 0.0;

  std::size_t size() const { return epoch.size(); }
};

inline std::string format_telemetry(const Telemetry& t) {
  std::vector<double> ep(t.epoch.begin(), t.epoch.end());
  return io::format_columns({"epoch", "train_loss", "val_loss", "alpha"},
                            {ep, t.train_loss, t.val_loss, t.alpha});
}

inline Telemetry parse_telemetry(std::string_view text) {
  const auto table = io::parse_csv(text);
  if (table.header != std::vector<std::string>{"epoch", "train_loss", "val_loss", "alpha"})
    throw DataError("unexpected telemetry header");
  Telemetry t;
  for (const auto& r : table.rows) {
    t.epoch.push_back(static_cast<std::size_t>(io::parse_double(r[0])));
    t.train_loss.push_back(io::parse_double(r[1]));
    t.val_loss.push_back(io::parse_double(r[2]));
    t.alpha.push_back(io::parse_double(r[3]));
  }
  return t;
}

struct EpochRecord {
  std::size_t epoch;
  std::size_t epochs;
  double train_loss;
  double val_loss;
  double alpha;
};

using ProgressFn = std::function<void(const EpochRecord&)>;

/// Trains `model` in place. Works for any model exposing params_mut(),
/// num_params(), loss_and_grad(batch, grad), loss(batch) and alpha().
/// Epoch 0 of the telemetry holds the untrained state.
template <typename Scalar, typename Model>
Telemetry fit(Model& model, const Dataset& ds, const TrainConfig& cfg,
              const ProgressFn& progress = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto train_idx = ds.indices(Split::train);
  const auto val_idx = ds.indices(Split::val);
  if (train_idx.empty()) throw InputError("fit: dataset has no training points");

  auto full_train = gather<Scalar>(ds, train_idx);
  auto val = gather<Scalar>(ds, val_idx);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto i : train_idx) {
    lo = std::min(lo, ds.times[i]);
    hi = std::max(hi, ds.times[i]);
  }

  auto eval_loss = [&](Batch<Scalar>& b) {
    if (b.size() == 0) return std::numeric_limits<double>::quiet_NaN();
    b.time_lo = lo;
    b.time_hi = hi;
    return model.loss(b);
  };

  Telemetry tel;
  auto record = [&](std::size_t e, double tr, double va) {
    tel.epoch.push_back(e);
    tel.train_loss.push_back(tr);
    tel.val_loss.push_back(va);
    tel.alpha.push_back(model.alpha());
    if (progress) progress({e, cfg.epochs, tr, va, model.alpha()});
  };
  record(0, eval_loss(full_train), eval_loss(val));
  full_train = {};

  SeededRng shuffler(cfg.model_seed, "shuffle");
  AdamState<Scalar> state(static_cast<Eigen::Index>(model.num_params()));
  Vec<Scalar> grad;
  const std::size_t n = train_idx.size();
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    shuffler.shuffle(train_idx.data(), n);
    double sum = 0.0;
    for (std::size_t off = 0; off < n; off += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, n - off);
      auto b = gather<Scalar>(ds, std::span<const std::size_t>(train_idx.data() + off, len));
      b.time_lo = lo;
      b.time_hi = hi;
      const double loss = model.loss_and_grad(b, grad);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(e));
      try {
        adam_step(model.params_mut(), grad, state, cfg.adam);
      } catch (const TrainingError& err) {
        throw TrainingError(std::string(err.what()) + " (epoch " + std::to_string(e) + ")");
      }
      sum += loss * static_cast<double>(len);
    }
    record(e, sum / static_cast<double>(n), eval_loss(val));
  }
  tel.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tel;
}

}  // namespace paraqnn
