#pragma once

// Single-channel regressor shared by the PINN and plain-MLP baselines:
// tanh hidden layers, sigmoid output so predictions stay in (0, 1).

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "paraqnn/errors.hpp"
#include "paraqnn/paranet.hpp"
#include "paraqnn/rng.hpp"

namespace paraqnn {

template <typename Scalar>
struct TanhCache {
  std::uint64_t revision = 0;
  Eigen::Index batch = 0;
  std::vector<Mat<Scalar>> inputs;
  std::vector<Mat<Scalar>> activations;
};

template <typename Scalar = double>
class TanhNet {
 public:
  using Matrix = Mat<Scalar>;
  using Vector = Vec<Scalar>;

  TanhNet() : TanhNet(NetShape{}) {}

  explicit TanhNet(NetShape shape) : shape_(std::move(shape)) {
    const auto w = shape_.widths();
    for (auto v : w)
      if (v == 0) throw InputError("TanhNet: layer widths must be positive");
    if (shape_.input != 1 || shape_.output != 1)
      throw InputError("TanhNet: scalar input and output expected");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
      Layout lay{static_cast<Eigen::Index>(w[l]), static_cast<Eigen::Index>(w[l + 1]), offset, 0};
      offset += w[l] * w[l + 1];
      lay.b_offset = offset;
      offset += w[l + 1];
      layout_.push_back(lay);
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(offset));
  }

  static TanhNet initialized(const NetShape& shape, std::uint64_t seed) {
    TanhNet net(shape);
    SeededRng rng(seed, "init");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const auto& lay = net.layout_[l];
      const double bound = std::sqrt(6.0 / static_cast<double>(lay.in + lay.out));
      auto w = net.weights(net.params_.data(), l);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
    return net;
  }

  const NetShape& shape() const { return shape_; }
  std::size_t num_layers() const { return layout_.size(); }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  const Vector& params() const { return params_; }
  Vector& params_mut() {
    ++revision_;
    return params_;
  }
  std::uint64_t revision() const { return revision_; }

  Row<Scalar> forward(const Row<Scalar>& tau, TanhCache<Scalar>* cache = nullptr) const {
    return forward_with(params_.data(), tau, cache);
  }

  /// Forward pass reading parameters from an external buffer laid out like
  /// params(); used when the body is embedded in a larger parameter vector.
  Row<Scalar> forward_with(const Scalar* base, const Row<Scalar>& tau,
                           TanhCache<Scalar>* cache = nullptr) const {
    Matrix x = tau.matrix();
    if (cache) {
      cache->revision = revision_;
      cache->batch = tau.size();
      cache->inputs.clear();
      cache->activations.clear();
    }
    for (std::size_t l = 0; l < num_layers(); ++l) {
      Matrix z = weights(base, l) * x;
      z.colwise() += bias(base, l);
      const bool last = l + 1 == num_layers();
      if (last) {
        z = z.unaryExpr([](Scalar v) { return stable_sigmoid<Scalar>(v); });
      } else {
        z = z.array().tanh().matrix();
      }
      if (cache) {
        cache->inputs.push_back(std::move(x));
        cache->activations.push_back(z);
      }
      x = std::move(z);
    }
    return x.row(0).array();
  }

  /// Gradient of sum(d_out * output) into a params()-shaped buffer.
  void backward_into(const Scalar* base, Scalar* grad, const TanhCache<Scalar>& cache,
                     const Row<Scalar>& d_out) const {
    if (cache.inputs.size() != num_layers() || d_out.size() != cache.batch)
      throw ContractError("TanhNet::backward: mismatched forward cache");
    Matrix d = d_out.matrix();
    for (std::size_t li = num_layers(); li-- > 0;) {
      const Matrix& a = cache.activations[li];
      Matrix dz;
      if (li + 1 == num_layers()) {
        dz = (d.array() * a.array() * (Scalar(1) - a.array())).matrix();
      } else {
        dz = (d.array() * (Scalar(1) - a.array().square())).matrix();
      }
      const auto& lay = layout_[li];
      Eigen::Map<Matrix> gw(grad + lay.w_offset, lay.out, lay.in);
      Eigen::Map<Vector> gb(grad + lay.b_offset, lay.out);
      gw.noalias() += dz * cache.inputs[li].transpose();
      gb += dz.rowwise().sum();
      if (li > 0) d.noalias() = weights(base, li).transpose() * dz;
    }
  }

  Vector backward(const TanhCache<Scalar>& cache, const Row<Scalar>& d_out) const {
    if (cache.revision != revision_) throw ContractError("TanhNet::backward: stale forward cache");
    Vector grad = Vector::Zero(params_.size());
    backward_into(params_.data(), grad.data(), cache, d_out);
    return grad;
  }

 private:
  struct Layout {
    Eigen::Index in;
    Eigen::Index out;
    std::size_t w_offset;
    std::size_t b_offset;
  };

  Eigen::Map<const Matrix> weights(const Scalar* base, std::size_t l) const {
    const auto& lay = layout_[l];
    return {base + lay.w_offset, lay.out, lay.in};
  }
  Eigen::Map<Matrix> weights(Scalar* base, std::size_t l) {
    const auto& lay = layout_[l];
    return {base + lay.w_offset, lay.out, lay.in};
  }
  Eigen::Map<const Vector> bias(const Scalar* base, std::size_t l) const {
    const auto& lay = layout_[l];
    return {base + lay.b_offset, lay.out};
  }

  NetShape shape_;
  std::vector<Layout> layout_;
  Vector params_;
  std::uint64_t revision_ = 0;
};

}  // namespace paraqnn
