#pragma once

// One training run for any model kind, plus held-out evaluation.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "paraqnn/baselines.hpp"
#include "paraqnn/dataset.hpp"
#include "paraqnn/training.hpp"

namespace paraqnn {

inline double mse(std::span<const double> pred, std::span<const double> target) {
  if (pred.empty()) throw InputError("mse: empty input");
  if (pred.size() != target.size()) throw InputError("mse: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred[i] - target[i];
    acc += r * r;
  }
  return acc / static_cast<double>(pred.size());
}

struct EvalMetrics {
  double test_mse = 0.0;        // t_hat vs y_clean on the test split
  double test_mse_noisy = 0.0;  // t_hat vs y_noisy on the test split
  double contradiction_rate = std::numeric_limits<double>::quiet_NaN();  // ParaQNN only
  std::vector<double> phase_mse;  // test MSE per drive segment
};

struct TrainOutcome {
  ModelKind kind = ModelKind::paraqnn;
  std::uint64_t seed = 0;
  Telemetry telemetry;
  EvalMetrics metrics;
  nlohmann::json checkpoint;
  std::vector<double> t_hat;  // prediction at every dataset point
  std::vector<double> f_hat;  // falsity channel, ParaQNN only
  PhysicsCoefficients physics;
};

inline EvalMetrics evaluate(const Dataset& ds, std::span<const double> t_hat,
                            std::span<const double> f_hat) {
  EvalMetrics m;
  const auto test = ds.indices(Split::test);
  if (test.empty()) throw InputError("evaluate: dataset has no test points");
  std::vector<double> p, clean, noisy;
  std::size_t contradictions = 0;
  for (auto i : test) {
    p.push_back(t_hat[i]);
    clean.push_back(ds.y_clean[i]);
    noisy.push_back(ds.y_noisy[i]);
    if (!f_hat.empty() && t_hat[i] + f_hat[i] > 1.0) ++contradictions;
  }
  m.test_mse = mse(p, clean);
  m.test_mse_noisy = mse(p, noisy);
  if (!f_hat.empty())
    m.contradiction_rate = static_cast<double>(contradictions) / static_cast<double>(test.size());

  const auto& segs = ds.config.schedule.segments();
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const bool last = s + 1 == segs.size();
    std::vector<double> sp, sc;
    for (auto i : test) {
      const double t = ds.times[i];
      if (t >= segs[s].start && (t < segs[s].end || (last && t <= segs[s].end))) {
        sp.push_back(t_hat[i]);
        sc.push_back(ds.y_clean[i]);
      }
    }
    m.phase_mse.push_back(sp.empty() ? std::numeric_limits<double>::quiet_NaN() : mse(sp, sc));
  }
  return m;
}

namespace detail {

inline constexpr std::size_t kPredictChunk = 4096;

template <typename Scalar, typename Fn>
void predict_all(const Dataset& ds, Fn&& fn) {
  const double span = ds.config.time_span();
  for (std::size_t off = 0; off < ds.size(); off += kPredictChunk) {
    const std::size_t len = std::min(kPredictChunk, ds.size() - off);
    Row<Scalar> tau(static_cast<Eigen::Index>(len));
    for (std::size_t i = 0; i < len; ++i)
      tau[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(ds.times[off + i] / span);
    fn(off, tau);
  }
}

}  // namespace detail

template <typename Scalar = float>
TrainOutcome train_model(ModelKind kind, const Dataset& ds, const TrainConfig& cfg,
                         const ProgressFn& progress = {}) {
  TrainOutcome out;
  out.kind = kind;
  out.seed = cfg.model_seed;
  out.t_hat.resize(ds.size());
  if (kind == ModelKind::paraqnn) {
    auto model = ParaQnnModel<Scalar>::build(cfg);
    out.telemetry = fit<Scalar>(model, ds, cfg, progress);
    out.f_hat.resize(ds.size());
    detail::predict_all<Scalar>(ds, [&](std::size_t off, const Row<Scalar>& tau) {
      const auto d = model.predict_dual(tau);
      for (Eigen::Index i = 0; i < tau.size(); ++i) {
        out.t_hat[off + static_cast<std::size_t>(i)] = static_cast<double>(d.t[i]);
        out.f_hat[off + static_cast<std::size_t>(i)] = static_cast<double>(d.f[i]);
      }
    });
    out.checkpoint = model.checkpoint();
  } else {
    auto model = build_baseline<Scalar>(BaselineSpec::from(kind, cfg), cfg.model_seed,
                                        ds.config.time_span());
    out.telemetry = fit<Scalar>(model, ds, cfg, progress);
    detail::predict_all<Scalar>(ds, [&](std::size_t off, const Row<Scalar>& tau) {
      const auto p = model.predict(tau);
      for (Eigen::Index i = 0; i < tau.size(); ++i)
        out.t_hat[off + static_cast<std::size_t>(i)] = static_cast<double>(p[i]);
    });
    out.physics = model.physics();
    out.checkpoint = model.checkpoint();
  }
  out.checkpoint["train_config"] = to_json(cfg);
  out.checkpoint["dataset_stamp"] = to_json(ds.stamp);
  out.checkpoint["stamp"] = to_json(version_stamp(
      {{"train_config", to_json(cfg)}, {"dataset", to_json(ds.config)}, {"model", to_string(kind)}},
      {ds.config.data_seed, cfg.model_seed}));
  out.metrics = evaluate(ds, out.t_hat, out.f_hat);
  return out;
}

}  // namespace paraqnn
