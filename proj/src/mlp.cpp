#include "slicesim/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "slicesim/error.hpp"

namespace slicesim {

void LayerBuffers::zero() {
  for (auto& w : weight) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

double LayerBuffers::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight)
    for (double x : w) s += x * x;
  for (const auto& b : bias)
    for (double x : b) s += x * x;
  return s;
}

void LayerBuffers::scale(double factor) {
  for (auto& w : weight)
    for (double& x : w) x *= factor;
  for (auto& b : bias)
    for (double& x : b) x *= factor;
}

bool LayerBuffers::all_finite() const {
  for (const auto& w : weight)
    for (double x : w)
      if (!std::isfinite(x)) return false;
  for (const auto& b : bias)
    for (double x : b)
      if (!std::isfinite(x)) return false;
  return true;
}

Mlp::Mlp(std::span<const std::size_t> sizes, Rng& rng, double output_gain) {
  if (sizes.size() < 2) throw Error(ErrorKind::dimension_mismatch, "network needs input and output sizes");
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    DenseLayer layer;
    layer.inputs = sizes[i];
    layer.outputs = sizes[i + 1];
    const bool last = i + 2 == sizes.size();
    layer.activation = last ? Activation::identity : Activation::tanh;
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs + layer.outputs)) * (last ? output_gain : 1.0);
    std::uniform_real_distribution<double> dist(-limit, limit);
    layer.weight.resize(layer.inputs * layer.outputs);
    for (double& w : layer.weight) w = dist(rng);
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.size() != l.inputs * l.outputs || l.bias.size() != l.outputs)
      throw Error(ErrorKind::dimension_mismatch, "layer parameter sizes do not match its shape");
    if (i > 0 && layers_[i - 1].outputs != l.inputs)
      throw Error(ErrorKind::dimension_mismatch, "consecutive layer shapes do not chain");
  }
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Tape tape;
  return forward(input, tape);
}

std::vector<double> Mlp::forward(std::span<const double> input, Tape& tape) const {
  if (input.size() != input_size())
    throw Error(ErrorKind::dimension_mismatch, "network input has the wrong dimension");
  tape.activations.resize(layers_.size() + 1);
  tape.activations[0].assign(input.begin(), input.end());
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& l = layers_[li];
    const auto& x = tape.activations[li];
    auto& y = tape.activations[li + 1];
    y.assign(l.outputs, 0.0);
    for (std::size_t o = 0; o < l.outputs; ++o) {
      const double* row = l.weight.data() + o * l.inputs;
      double acc = l.bias[o];
      for (std::size_t i = 0; i < l.inputs; ++i) acc += row[i] * x[i];
      y[o] = l.activation == Activation::tanh ? std::tanh(acc) : acc;
    }
  }
  return tape.activations.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> output_grad, LayerBuffers& grads) const {
  if (output_grad.size() != output_size())
    throw Error(ErrorKind::dimension_mismatch, "output gradient has the wrong dimension");
  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& l = layers_[li];
    const auto& x = tape.activations[li];
    const auto& y = tape.activations[li + 1];
    if (l.activation == Activation::tanh) {
      for (std::size_t o = 0; o < l.outputs; ++o) delta[o] *= 1.0 - y[o] * y[o];
    }
    auto& gw = grads.weight[li];
    auto& gb = grads.bias[li];
    std::vector<double> prev(l.inputs, 0.0);
    for (std::size_t o = 0; o < l.outputs; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      const double* row = l.weight.data() + o * l.inputs;
      double* grow = gw.data() + o * l.inputs;
      for (std::size_t i = 0; i < l.inputs; ++i) {
        grow[i] += d * x[i];
        prev[i] += d * row[i];
      }
    }
    delta = std::move(prev);
  }
}

LayerBuffers Mlp::zero_buffers() const {
  LayerBuffers b;
  for (const auto& l : layers_) {
    b.weight.emplace_back(l.weight.size(), 0.0);
    b.bias.emplace_back(l.bias.size(), 0.0);
  }
  return b;
}

bool Mlp::all_finite() const {
  for (const auto& l : layers_) {
    for (double w : l.weight)
      if (!std::isfinite(w)) return false;
    for (double b : l.bias)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

Optimizer::Optimizer(const Mlp& net, double learning_rate, bool adaptive)
    : lr_(learning_rate), adaptive_(adaptive), m_(net.zero_buffers()), v_(net.zero_buffers()) {}

void Optimizer::step(Mlp& net, const LayerBuffers& grads) {
  ++t_;
  auto& layers = net.layers();
  if (!adaptive_) {
    for (std::size_t li = 0; li < layers.size(); ++li) {
      for (std::size_t i = 0; i < layers[li].weight.size(); ++i) layers[li].weight[i] -= lr_ * grads.weight[li][i];
      for (std::size_t i = 0; i < layers[li].bias.size(); ++i) layers[li].bias[i] -= lr_ * grads.bias[li][i];
    }
    return;
  }
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  };
  for (std::size_t li = 0; li < layers.size(); ++li) {
    update(layers[li].weight, grads.weight[li], m_.weight[li], v_.weight[li]);
    update(layers[li].bias, grads.bias[li], m_.bias[li], v_.bias[li]);
  }
}

}  // namespace slicesim
