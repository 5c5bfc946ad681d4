// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "avsyn/error.hpp"
#include "avsyn/rng.hpp"

namespace avsyn {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using MatF = Mat<float>;
using VecF = Vec<float>;
using MatD = Mat<double>;
using VecD = Vec<double>;

enum class Activation { kIdentity, kTanh, kRelu, kSigmoid };

inline std::string activation_name(Activation act) {
  switch (act) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  throw DomainError("unknown activation");
}

inline Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw DomainError("unknown activation name: " + name);
}

// One affine layer: y = act(W x + b). Weight is (out x in).
template <class S>
struct DenseLayer {
  Mat<S> weight;
  Vec<S> bias;
  Activation activation = Activation::kIdentity;

  Eigen::Index in_dim() const { return weight.cols(); }
  Eigen::Index out_dim() const { return weight.rows(); }
};

// A chain of dense layers. Adjacent dimensions must agree.
template <class S>
struct DenseNet {
  std::vector<DenseLayer<S>> layers;

  Eigen::Index input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
  Eigen::Index output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }
};

template <class S>
DenseNet<S> make_dense_net(const std::vector<int>& dims, const std::vector<Activation>& acts) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw ShapeError("dense net needs dims.size() >= 2 and one activation per layer");
  DenseNet<S> net;
  net.layers.resize(dims.size() - 1);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    if (dims[k] <= 0 || dims[k + 1] <= 0) throw ShapeError("layer dimensions must be positive");
    net.layers[k].weight = Mat<S>::Zero(dims[k + 1], dims[k]);
    net.layers[k].bias = Vec<S>::Zero(dims[k + 1]);
    net.layers[k].activation = acts[k];
  }
  return net;
}

// Glorot-uniform weights with an activation-aware gain (5/3 for tanh layers,
// 1 otherwise), zero biases. Entries are drawn row-major so the layout is
// part of the determinism contract.
template <class S>
void glorot_init(DenseNet<S>& net, Rng& rng) {
  for (auto& layer : net.layers) {
    const double gain = layer.activation == Activation::kTanh ? 5.0 / 3.0 : 1.0;
    const double limit = gain * std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = static_cast<S>(rng.uniform(-limit, limit));
    layer.bias.setZero();
  }
}

template <class S>
Mat<S> apply_activation(Activation act, const Mat<S>& pre) {
  switch (act) {
    case Activation::kIdentity:
      return pre;
    case Activation::kTanh:
      return pre.array().tanh().matrix();
    case Activation::kRelu:
      return pre.array().max(S(0)).matrix();
    case Activation::kSigmoid:
      return (S(1) / (S(1) + (-pre.array()).exp())).matrix();
  }
  throw DomainError("unknown activation");
}

// Derivative of the activation, expressed from pre- and post-activation values.
template <class S>
Mat<S> activation_grad(Activation act, const Mat<S>& pre, const Mat<S>& post) {
  switch (act) {
    case Activation::kIdentity:
      return Mat<S>::Ones(pre.rows(), pre.cols());
    case Activation::kTanh:
      return (S(1) - post.array().square()).matrix();
    case Activation::kRelu:
      return (pre.array() > S(0)).template cast<S>().matrix();
    case Activation::kSigmoid:
      return (post.array() * (S(1) - post.array())).matrix();
  }
  throw DomainError("unknown activation");
}

// Per-layer pre/post activations kept for the backward pass. Columns are
// batch items.
template <class S>
struct ForwardCache {
  Mat<S> input;
  std::vector<Mat<S>> pre;
  std::vector<Mat<S>> post;
};

template <class S>
Mat<S> forward(const DenseNet<S>& net, const Mat<S>& x, ForwardCache<S>* cache = nullptr) {
  if (net.layers.empty()) throw ShapeError("forward on empty net");
  if (x.rows() != net.input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.rows()) + " rows, net expects " +
                     std::to_string(net.input_dim()));
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
    cache->pre.reserve(net.layers.size());
    cache->post.reserve(net.layers.size());
  }
  Mat<S> h = x;
  for (const auto& layer : net.layers) {
    Mat<S> pre = (layer.weight * h).colwise() + layer.bias;
    Mat<S> post = apply_activation(layer.activation, pre);
    if (cache) {
      cache->pre.push_back(pre);
      cache->post.push_back(post);
    }
    h = std::move(post);
  }
  return h;
}

template <class S>
Vec<S> forward(const DenseNet<S>& net, const Vec<S>& x) {
  return forward<S>(net, Mat<S>(x), nullptr).col(0);
}

template <class S>
struct LayerGrads {
  Mat<S> weight;
  Vec<S> bias;
};

template <class S>
struct NetGrads {
  std::vector<LayerGrads<S>> layers;
  Mat<S> input;  // dLoss/dInput, same shape as the forward input
};

// Backpropagate dLoss/dOutput through the net. The cache must come from a
// forward call on this net with caching enabled.
template <class S>
NetGrads<S> backward(const DenseNet<S>& net, const ForwardCache<S>& cache, const Mat<S>& output_grad) {
  const std::size_t n = net.layers.size();
  if (cache.pre.size() != n || cache.post.size() != n || cache.input.size() == 0)
    throw ContractError("backward: cache does not match net (missing or stale forward)");
  if (cache.input.rows() != net.input_dim())
    throw ContractError("backward: cache was built for a different input shape");
  if (output_grad.rows() != net.output_dim() || output_grad.cols() != cache.input.cols())
    throw ShapeError("backward: output gradient shape mismatch");

  NetGrads<S> grads;
  grads.layers.resize(n);
  Mat<S> delta = output_grad;
  for (std::size_t k = n; k-- > 0;) {
    const auto& layer = net.layers[k];
    if (cache.pre[k].rows() != layer.out_dim())
      throw ContractError("backward: cache layer shapes do not match net");
    delta = delta.cwiseProduct(activation_grad(layer.activation, cache.pre[k], cache.post[k]));
    const Mat<S>& below = (k == 0) ? cache.input : cache.post[k - 1];
    grads.layers[k].weight.noalias() = delta * below.transpose();
    grads.layers[k].bias = delta.rowwise().sum();
    if (k > 0)
      delta = (layer.weight.transpose() * delta).eval();
    else
      grads.input.noalias() = layer.weight.transpose() * delta;
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Diagonal Gaussian utilities
// ---------------------------------------------------------------------------

inline constexpr double kLogVarClampMin = -20.0;
inline constexpr double kLogVarClampMax = 20.0;

template <class S>
struct Gaussian {
  Vec<S> mu;
  Vec<S> logvar;
};

using GaussianLatent = Gaussian<float>;

template <class S>
Gaussian<S> make_gaussian(Vec<S> mu, Vec<S> logvar) {
  if (mu.size() != logvar.size()) throw ShapeError("gaussian: mu/logvar length mismatch");
  logvar = logvar.array().min(S(kLogVarClampMax)).max(S(kLogVarClampMin)).matrix();
  return Gaussian<S>{std::move(mu), std::move(logvar)};
}

// KL divergence to the standard-normal prior, accumulated in double:
// 1/2 * sum(mu^2 + exp(logvar) - logvar - 1).
template <class S>
double gaussian_kl(const Gaussian<S>& g) {
  if (g.mu.size() != g.logvar.size()) throw ShapeError("gaussian_kl: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g.mu.size(); ++i) {
    const double mu = static_cast<double>(g.mu[i]);
    const double lv = static_cast<double>(g.logvar[i]);
    acc += mu * mu + std::exp(lv) - lv - 1.0;
  }
  return 0.5 * acc;
}

// z = mu + exp(logvar / 2) * eps
template <class S>
Vec<S> reparameterize(const Gaussian<S>& g, const Vec<S>& eps) {
  if (eps.size() != g.mu.size()) throw ShapeError("reparameterize: eps length mismatch");
  return g.mu.array() + (g.logvar.array() / S(2)).exp() * eps.array();
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

// Max-subtracted softmax over a single logit vector.
template <class S>
Vec<S> softmax(const Vec<S>& logits) {
  if (logits.size() == 0) throw ShapeError("softmax on empty logits");
  Vec<S> shifted = logits.array() - logits.maxCoeff();
  Vec<S> e = shifted.array().exp();
  return e / e.sum();
}

// -log p(target) under softmax(logits).
template <class S>
double softmax_cross_entropy(const Vec<S>& logits, int target) {
  if (target < 0 || target >= logits.size())
    throw DomainError("cross entropy: target token " + std::to_string(target) + " outside alphabet");
  const double mx = static_cast<double>(logits.maxCoeff());
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i)
    sum += std::exp(static_cast<double>(logits[i]) - mx);
  return std::log(sum) - (static_cast<double>(logits[target]) - mx);
}

// Mean squared difference over all entries.
template <class S>
double mse(const Mat<S>& y, const Mat<S>& target) {
  if (y.rows() != target.rows() || y.cols() != target.cols())
    throw ShapeError("mse: shape mismatch");
  if (y.size() == 0) throw ShapeError("mse on empty input");
  double acc = 0.0;
  for (Eigen::Index c = 0; c < y.cols(); ++c)
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double d = static_cast<double>(y(r, c)) - static_cast<double>(target(r, c));
      acc += d * d;
    }
  return acc / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

template <class S>
struct AdamConfig {
  S lr = S(1e-3);
  S beta1 = S(0.9);
  S beta2 = S(0.999);
  S eps = S(1e-8);
};

template <class S>
struct AdamState {
  long step = 0;
  AdamConfig<S> config;
  std::vector<LayerGrads<S>> m;
  std::vector<LayerGrads<S>> v;
};

template <class S>
AdamState<S> make_adam(const DenseNet<S>& net, AdamConfig<S> config = {}) {
  AdamState<S> state;
  state.config = config;
  state.m.resize(net.layers.size());
  state.v.resize(net.layers.size());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    state.m[k].weight = Mat<S>::Zero(net.layers[k].weight.rows(), net.layers[k].weight.cols());
    state.m[k].bias = Vec<S>::Zero(net.layers[k].bias.size());
    state.v[k] = state.m[k];
  }
  return state;
}

template <class S, class T>
void adam_update_tensor(const AdamConfig<S>& cfg, long step, T& m, T& v, T& param, const T& grad) {
  m = cfg.beta1 * m + (S(1) - cfg.beta1) * grad;
  v = (cfg.beta2 * v.array() + (S(1) - cfg.beta2) * grad.array().square()).matrix();
  const S corr1 = S(1) - static_cast<S>(std::pow(static_cast<double>(cfg.beta1), step));
  const S corr2 = S(1) - static_cast<S>(std::pow(static_cast<double>(cfg.beta2), step));
  param.array() -= cfg.lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + cfg.eps);
}

template <class S>
void adam_step(AdamState<S>& state, DenseNet<S>& net, const NetGrads<S>& grads) {
  if (grads.layers.size() != net.layers.size() || state.m.size() != net.layers.size())
    throw ShapeError("adam_step: state/net/grads layer count mismatch");
  ++state.step;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto& layer = net.layers[k];
    if (grads.layers[k].weight.rows() != layer.weight.rows() ||
        grads.layers[k].weight.cols() != layer.weight.cols() ||
        grads.layers[k].bias.size() != layer.bias.size())
      throw ShapeError("adam_step: gradient shape mismatch at layer " + std::to_string(k));
    adam_update_tensor(state.config, state.step, state.m[k].weight, state.v[k].weight,
                       layer.weight, grads.layers[k].weight);
    adam_update_tensor(state.config, state.step, state.m[k].bias, state.v[k].bias,
                       layer.bias, grads.layers[k].bias);
  }
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

enum class LossKind { kMse, kStepCrossEntropy };

// Declarative loss for gradient checks: either mean squared error against a
// target, or summed per-step cross entropy where the output is read as
// consecutive blocks of `alphabet` logits.
template <class S>
struct LossSpec {
  LossKind kind = LossKind::kMse;
  Mat<S> target;             // kMse
  std::vector<int> tokens;   // kStepCrossEntropy, one target per step
  int alphabet = 0;
};

template <class S>
double loss_value(const LossSpec<S>& spec, const Mat<S>& y) {
  if (spec.kind == LossKind::kMse) return mse(y, spec.target);
  if (spec.alphabet <= 0 || y.rows() != static_cast<Eigen::Index>(spec.tokens.size()) * spec.alphabet)
    throw ShapeError("loss_value: logits do not split into alphabet blocks");
  double total = 0.0;
  for (Eigen::Index col = 0; col < y.cols(); ++col)
    for (std::size_t s = 0; s < spec.tokens.size(); ++s) {
      Vec<S> block = y.col(col).segment(static_cast<Eigen::Index>(s) * spec.alphabet, spec.alphabet);
      total += softmax_cross_entropy(block, spec.tokens[s]);
    }
  return total / static_cast<double>(y.cols());
}

template <class S>
Mat<S> loss_grad(const LossSpec<S>& spec, const Mat<S>& y) {
  if (spec.kind == LossKind::kMse) {
    if (y.rows() != spec.target.rows() || y.cols() != spec.target.cols())
      throw ShapeError("loss_grad: shape mismatch");
    return (S(2) / static_cast<S>(y.size())) * (y - spec.target);
  }
  Mat<S> grad(y.rows(), y.cols());
  for (Eigen::Index col = 0; col < y.cols(); ++col)
    for (std::size_t s = 0; s < spec.tokens.size(); ++s) {
      const Eigen::Index off = static_cast<Eigen::Index>(s) * spec.alphabet;
      Vec<S> p = softmax(Vec<S>(y.col(col).segment(off, spec.alphabet)));
      p[spec.tokens[s]] -= S(1);
      grad.col(col).segment(off, spec.alphabet) = p / static_cast<S>(y.cols());
    }
  return grad;
}

// Relative error between an analytic and a numeric gradient entry.
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(std::abs(analytic) + std::abs(numeric), 1e-8);
}

// Central-difference check of backward() over every parameter. Returns the
// max relative error. Intended for small nets (<= 1e4 parameters).
template <class S>
double grad_check(DenseNet<S>& net, const LossSpec<S>& loss, const Mat<S>& x, S h = S(1e-4)) {
  ForwardCache<S> cache;
  Mat<S> y = forward(net, x, &cache);
  NetGrads<S> analytic = backward(net, cache, loss_grad(loss, y));

  double worst = 0.0;
  auto probe = [&](S& param, double analytic_grad) {
    const S saved = param;
    param = saved + h;
    const double up = loss_value(loss, forward(net, x));
    param = saved - h;
    const double down = loss_value(loss, forward(net, x));
    param = saved;
    const double numeric = (up - down) / (2.0 * static_cast<double>(h));
    worst = std::max(worst, relative_error(analytic_grad, numeric));
  };

  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    auto& layer = net.layers[k];
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        probe(layer.weight(r, c), static_cast<double>(analytic.layers[k].weight(r, c)));
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i)
      probe(layer.bias[i], static_cast<double>(analytic.layers[k].bias[i]));
  }
  return worst;
}

}  // namespace avsyn
