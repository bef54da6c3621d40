#pragma once

// Dual-channel paraconsistent network.
//
// Every neuron carries a (truth, falsity) pair. A layer couples the two
// channels through four matrices,
//
//   z_t = W_tt t + W_tf f + b_t
//   z_f = W_ft t + W_ff f + b_f
//
// followed by the PIAF activation
//
//   t' = sigmoid(k (z_t - alpha z_f)),   f' = sigmoid(k z_f)
//
// with one learnable alpha > 0 shared by all layers. The four matrices of a
// layer are stored as one packed block [[W_tt, W_tf], [W_ft, W_ff]] acting
// on the stacked input [t; f], so each layer costs a single GEMM.
//
// All parameters live in one flat vector (see ParaNet::params()); layer
// views are Eigen::Maps computed from fixed offsets, so a ParaNet copies
// like a value.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "paraqnn/errors.hpp"
#include "paraqnn/io.hpp"
#include "paraqnn/rng.hpp"

namespace paraqnn {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Row = Eigen::Array<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
inline Scalar stable_sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
struct DualRows {
  Row<Scalar> t;
  Row<Scalar> f;
};

/// PIAF on pre-activation vectors.
template <typename Scalar>
DualRows<Scalar> piaf(const Row<Scalar>& z_t, const Row<Scalar>& z_f, Scalar alpha, Scalar k) {
  if (z_t.size() != z_f.size()) throw InputError("piaf: length mismatch");
  DualRows<Scalar> out{Row<Scalar>(z_t.size()), Row<Scalar>(z_f.size())};
  for (Eigen::Index i = 0; i < z_t.size(); ++i) {
    out.t[i] = stable_sigmoid<Scalar>(k * (z_t[i] - alpha * z_f[i]));
    out.f[i] = stable_sigmoid<Scalar>(k * z_f[i]);
  }
  return out;
}

/// Widths of the dual-channel stack; every hidden and output unit is a
/// (t, f) pair.
struct NetShape {
  std::size_t input = 1;
  std::vector<std::size_t> hidden = {128, 128, 128};
  std::size_t output = 1;

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w{input};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(output);
    return w;
  }

  friend bool operator==(const NetShape&, const NetShape&) = default;
};

inline nlohmann::json to_json(const NetShape& s) {
  return {{"input", s.input}, {"hidden", s.hidden}, {"output", s.output}};
}

inline NetShape shape_from_json(const nlohmann::json& j) {
  return NetShape{j.at("input").get<std::size_t>(), j.at("hidden").get<std::vector<std::size_t>>(),
                  j.at("output").get<std::size_t>()};
}

template <typename Scalar>
struct ParaCache {
  std::uint64_t revision = 0;
  Eigen::Index batch = 0;
  std::vector<Mat<Scalar>> inputs;       // [t; f] entering each layer
  std::vector<Mat<Scalar>> activations;  // [t'; f'] leaving each layer
  std::vector<Mat<Scalar>> z_f;          // falsity pre-activations
};

template <typename Scalar = double>
class ParaNet {
 public:
  using Matrix = Mat<Scalar>;
  using Vector = Vec<Scalar>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using VectorMap = Eigen::Map<Vector>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  /// Read/write view of one layer's parameters.
  template <typename M, typename V>
  struct LayerView {
    M w;  // packed (2*out) x (2*in)
    V b;  // packed (2*out): [b_t; b_f]
    Eigen::Index in;
    Eigen::Index out;

    auto w_tt() { return w.topLeftCorner(out, in); }
    auto w_tf() { return w.topRightCorner(out, in); }
    auto w_ft() { return w.bottomLeftCorner(out, in); }
    auto w_ff() { return w.bottomRightCorner(out, in); }
    auto b_t() { return b.head(out); }
    auto b_f() { return b.tail(out); }
  };

  ParaNet() : ParaNet(NetShape{}) {}

  explicit ParaNet(NetShape shape, Scalar k = Scalar(1), Scalar alpha0 = Scalar(6))
      : shape_(std::move(shape)), k_(k), alpha0_(alpha0) {
    const auto w = shape_.widths();
    for (auto v : w)
      if (v == 0) throw InputError("ParaNet: layer widths must be positive");
    if (shape_.output != 1) throw InputError("ParaNet: output width must be 1");
    if (!(k_ > Scalar(0))) throw InputError("ParaNet: k must be > 0");
    if (!(alpha0_ > Scalar(0))) throw InputError("ParaNet: alpha0 must be > 0");
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
      Layout lay;
      lay.in = static_cast<Eigen::Index>(w[l]);
      lay.out = static_cast<Eigen::Index>(w[l + 1]);
      lay.w_offset = offset;
      offset += static_cast<std::size_t>(4 * lay.in * lay.out);
      lay.b_offset = offset;
      offset += static_cast<std::size_t>(2 * lay.out);
      layout_.push_back(lay);
    }
    alpha_index_ = offset;
    params_ = Vector::Zero(static_cast<Eigen::Index>(offset + 1));
  }

  /// Glorot-uniform weights per matrix, zero biases, alpha = alpha0.
  static ParaNet initialized(const NetShape& shape, std::uint64_t seed, Scalar k = Scalar(1),
                             Scalar alpha0 = Scalar(6)) {
    ParaNet net(shape, k, alpha0);
    SeededRng rng(seed, "init");
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      auto v = net.layer(l);
      const double bound = std::sqrt(6.0 / static_cast<double>(v.in + v.out));
      auto fill = [&](auto block) {
        for (Eigen::Index r = 0; r < block.rows(); ++r)
          for (Eigen::Index c = 0; c < block.cols(); ++c)
            block(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
      };
      fill(v.w_tt());
      fill(v.w_tf());
      fill(v.w_ft());
      fill(v.w_ff());
    }
    return net;
  }

  const NetShape& shape() const { return shape_; }
  Scalar k() const { return k_; }
  Scalar alpha0() const { return alpha0_; }
  std::size_t num_layers() const { return layout_.size(); }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  std::size_t alpha_index() const { return alpha_index_; }

  /// alpha = alpha0 * exp(u), u the last entry of the flat vector. u = 0
  /// gives exactly alpha0.
  Scalar alpha() const { return alpha0_ * std::exp(params_[static_cast<Eigen::Index>(alpha_index_)]); }

  const Vector& params() const { return params_; }
  /// Mutable access invalidates outstanding forward caches.
  Vector& params_mut() {
    ++revision_;
    return params_;
  }
  std::uint64_t revision() const { return revision_; }

  LayerView<MatrixMap, VectorMap> layer(std::size_t l) {
    ++revision_;
    return view<MatrixMap, VectorMap>(params_.data(), l);
  }
  LayerView<ConstMatrixMap, ConstVectorMap> layer(std::size_t l) const {
    return view<ConstMatrixMap, ConstVectorMap>(params_.data(), l);
  }
  /// Same layout applied to a gradient buffer.
  LayerView<MatrixMap, VectorMap> layer_of(Vector& buffer, std::size_t l) const {
    check_buffer(buffer);
    return view<MatrixMap, VectorMap>(buffer.data(), l);
  }

  /// Forward pass on normalized times; returns (t_hat, f_hat). The input
  /// encoding sets t = f = tau at layer 0.
  DualRows<Scalar> forward(const Row<Scalar>& tau, ParaCache<Scalar>* cache = nullptr) const {
    const Eigen::Index batch = tau.size();
    Matrix x(2 * static_cast<Eigen::Index>(shape_.input), batch);
    if (shape_.input != 1) throw InputError("ParaNet::forward: scalar-time input expects width 1");
    x.row(0) = tau.matrix();
    x.row(1) = tau.matrix();
    const Scalar a = alpha();
    if (cache) {
      cache->revision = revision_;
      cache->batch = batch;
      cache->inputs.clear();
      cache->activations.clear();
      cache->z_f.clear();
    }
    for (std::size_t l = 0; l < num_layers(); ++l) {
      const auto v = layer(l);
      Matrix z = v.w * x;
      z.colwise() += v.b;
      Matrix act(2 * v.out, batch);
      for (Eigen::Index c = 0; c < batch; ++c) {
        for (Eigen::Index r = 0; r < v.out; ++r) {
          const Scalar zt = z(r, c);
          const Scalar zf = z(v.out + r, c);
          act(r, c) = stable_sigmoid<Scalar>(k_ * (zt - a * zf));
          act(v.out + r, c) = stable_sigmoid<Scalar>(k_ * zf);
        }
      }
      if (cache) {
        cache->inputs.push_back(std::move(x));
        cache->z_f.push_back(z.bottomRows(v.out));
        cache->activations.push_back(act);
      }
      x = std::move(act);
    }
    return {x.row(0).array(), x.row(1).array()};
  }

  /// Reverse-mode gradients of sum(d_t * t_hat + d_f * f_hat) with respect
  /// to every entry of params(), alpha's unconstrained entry included.
  Vector backward(const ParaCache<Scalar>& cache, const Row<Scalar>& d_t,
                  const Row<Scalar>& d_f) const {
    if (cache.revision != revision_ || cache.inputs.size() != num_layers())
      throw ContractError("ParaNet::backward: stale or mismatched forward cache");
    if (d_t.size() != cache.batch || d_f.size() != cache.batch)
      throw ContractError("ParaNet::backward: upstream gradient has wrong batch size");
    Vector grad = Vector::Zero(params_.size());
    const Scalar a = alpha();
    Scalar d_alpha = Scalar(0);

    Matrix d_act(2, cache.batch);
    d_act.row(0) = d_t.matrix();
    d_act.row(1) = d_f.matrix();
    for (std::size_t li = num_layers(); li-- > 0;) {
      const auto v = layer(li);
      const Matrix& act = cache.activations[li];
      const Matrix& zf = cache.z_f[li];
      Matrix dz(2 * v.out, cache.batch);
      for (Eigen::Index c = 0; c < cache.batch; ++c) {
        for (Eigen::Index r = 0; r < v.out; ++r) {
          const Scalar t = act(r, c);
          const Scalar f = act(v.out + r, c);
          const Scalar s_t = d_act(r, c) * t * (Scalar(1) - t) * k_;
          const Scalar s_f = d_act(v.out + r, c) * f * (Scalar(1) - f) * k_;
          dz(r, c) = s_t;
          dz(v.out + r, c) = s_f - a * s_t;
          d_alpha -= s_t * zf(r, c);
        }
      }
      auto g = layer_of(grad, li);
      g.w.noalias() = dz * cache.inputs[li].transpose();
      g.b = dz.rowwise().sum();
      if (li > 0) d_act.noalias() = v.w.transpose() * dz;
    }
    grad[static_cast<Eigen::Index>(alpha_index_)] = d_alpha * a;
    return grad;
  }

  Row<Scalar> predict(const Row<Scalar>& tau) const { return forward(tau).t; }

 private:
  struct Layout {
    Eigen::Index in = 0;
    Eigen::Index out = 0;
    std::size_t w_offset = 0;
    std::size_t b_offset = 0;
  };

  template <typename M, typename V, typename Ptr>
  LayerView<M, V> view(Ptr base, std::size_t l) const {
    if (l >= layout_.size()) throw InputError("ParaNet: layer index out of range");
    const auto& lay = layout_[l];
    return LayerView<M, V>{M(base + lay.w_offset, 2 * lay.out, 2 * lay.in),
                           V(base + lay.b_offset, 2 * lay.out), lay.in, lay.out};
  }

  void check_buffer(const Vector& buffer) const {
    if (buffer.size() != params_.size()) throw InputError("ParaNet: buffer size mismatch");
  }

  NetShape shape_;
  Scalar k_;
  Scalar alpha0_;
  std::vector<Layout> layout_;
  std::size_t alpha_index_ = 0;
  Vector params_;
  std::uint64_t revision_ = 0;
};

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr const char* kCheckpointFormat = "paraqnn.checkpoint";
inline constexpr int kCheckpointVersion = 1;

template <typename Scalar>
nlohmann::json params_to_json(const Vec<Scalar>& p) {
  std::vector<double> v(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) v[static_cast<std::size_t>(i)] = static_cast<double>(p[i]);
  return v;
}

template <typename Scalar>
Vec<Scalar> params_from_json(const nlohmann::json& j, std::size_t expected) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != expected)
    throw DataError("checkpoint parameter count " + std::to_string(v.size()) + " != expected " +
                    std::to_string(expected));
  Vec<Scalar> p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(v[i]);
  return p;
}

template <typename Scalar>
const char* scalar_name() {
  return sizeof(Scalar) == sizeof(float) ? "float32" : "float64";
}

template <typename Scalar>
nlohmann::json to_json(const ParaNet<Scalar>& net) {
  return {{"format", kCheckpointFormat},
          {"version", kCheckpointVersion},
          {"kind", "paraqnn"},
          {"scalar", scalar_name<Scalar>()},
          {"shape", to_json(net.shape())},
          {"k", static_cast<double>(net.k())},
          {"alpha0", static_cast<double>(net.alpha0())},
          {"alpha_parametrization", "alpha = alpha0 * exp(u), u = params[last]"},
          {"params", params_to_json(net.params())}};
}

template <typename Scalar>
ParaNet<Scalar> paranet_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat ||
        j.at("version").get<int>() != kCheckpointVersion || j.at("kind").get<std::string>() != "paraqnn")
      throw DataError("not a paraqnn checkpoint");
    if (j.at("scalar").get<std::string>() != scalar_name<Scalar>())
      throw DataError("checkpoint scalar type mismatch");
    ParaNet<Scalar> net(shape_from_json(j.at("shape")), static_cast<Scalar>(j.at("k").get<double>()),
                        static_cast<Scalar>(j.at("alpha0").get<double>()));
    net.params_mut() = params_from_json<Scalar>(j.at("params"), net.num_params());
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InputError& e) {
    throw DataError(std::string("invalid checkpoint: ") + e.what());
  }
}

}  // namespace paraqnn
