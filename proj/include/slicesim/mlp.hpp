#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "slicesim/random.hpp"

namespace slicesim {

enum class Activation { tanh, identity };

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  Activation activation = Activation::identity;
  std::vector<double> weight;  // outputs x inputs, row-major
  std::vector<double> bias;    // outputs
};

/// Parameter-shaped buffer (gradients, optimizer moments).
struct LayerBuffers {
  std::vector<std::vector<double>> weight;
  std::vector<std::vector<double>> bias;

  void zero();
  double squared_norm() const;
  void scale(double factor);
  bool all_finite() const;
};

/// Fully connected network: tanh hidden layers, identity output layer.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {inputs, hidden..., outputs}. Glorot-uniform weights, the output
  /// layer scaled by `output_gain`; zero biases.
  Mlp(std::span<const std::size_t> sizes, Rng& rng, double output_gain = 1.0);
  explicit Mlp(std::vector<DenseLayer> layers);

  std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().inputs; }
  std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().outputs; }
  std::size_t parameter_count() const;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  struct Tape {
    std::vector<std::vector<double>> activations;  // [0] = input, [i+1] = output of layer i
  };

  std::vector<double> forward(std::span<const double> input) const;
  std::vector<double> forward(std::span<const double> input, Tape& tape) const;
  /// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void backward(const Tape& tape, std::span<const double> output_grad, LayerBuffers& grads) const;

  LayerBuffers zero_buffers() const;
  bool all_finite() const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Adam with bias correction, or plain SGD when `adaptive` is false.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const Mlp& net, double learning_rate, bool adaptive);

  void step(Mlp& net, const LayerBuffers& grads);
  double learning_rate() const noexcept { return lr_; }
  std::size_t steps() const noexcept { return t_; }

 private:
  double lr_ = 3e-4;
  bool adaptive_ = true;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::size_t t_ = 0;
  LayerBuffers m_;
  LayerBuffers v_;
};

}  // namespace slicesim
