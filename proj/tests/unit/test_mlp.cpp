#include <gtest/gtest.h>

#include <cmath>

#include "slicesim/error.hpp"
#include "slicesim/mlp.hpp"

using namespace slicesim;

namespace {

double loss_of(const Mlp& net, const std::vector<double>& x, const std::vector<double>& w) {
  const auto y = net.forward(x);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i] + 0.5 * y[i] * y[i];
  return s;
}

}  // namespace

TEST(Mlp, ShapesAndInit) {
  Rng rng(1);
  const std::vector<std::size_t> sizes{5, 7, 3};
  Mlp net(sizes, rng);
  EXPECT_EQ(net.input_size(), 5u);
  EXPECT_EQ(net.output_size(), 3u);
  EXPECT_EQ(net.parameter_count(), 5u * 7 + 7 + 7 * 3 + 3);
  EXPECT_EQ(net.layers()[0].activation, Activation::tanh);
  EXPECT_EQ(net.layers()[1].activation, Activation::identity);
  const double limit = std::sqrt(6.0 / 12.0);
  for (double w : net.layers()[0].weight) EXPECT_LE(std::abs(w), limit);
  EXPECT_THROW(net.forward(std::vector<double>(4, 0.0)), Error);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  const std::vector<std::size_t> sizes{4, 6, 5, 2};
  Mlp net(sizes, rng);
  const std::vector<double> x{0.3, -0.7, 0.2, 0.9};
  const std::vector<double> w{0.4, -1.1};
  Mlp::Tape tape;
  const auto y = net.forward(x, tape);
  std::vector<double> g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = w[i] + y[i];
  auto grads = net.zero_buffers();
  net.backward(tape, g, grads);

  const double h = 1e-5;
  for (std::size_t li = 0; li < net.layers().size(); ++li) {
    for (std::size_t k = 0; k < net.layers()[li].weight.size(); ++k) {
      Mlp plus = net, minus = net;
      plus.layers()[li].weight[k] += h;
      minus.layers()[li].weight[k] -= h;
      const double fd = (loss_of(plus, x, w) - loss_of(minus, x, w)) / (2 * h);
      EXPECT_NEAR(grads.weight[li][k], fd, 1e-8) << "layer " << li << " weight " << k;
    }
    for (std::size_t k = 0; k < net.layers()[li].bias.size(); ++k) {
      Mlp plus = net, minus = net;
      plus.layers()[li].bias[k] += h;
      minus.layers()[li].bias[k] -= h;
      const double fd = (loss_of(plus, x, w) - loss_of(minus, x, w)) / (2 * h);
      EXPECT_NEAR(grads.bias[li][k], fd, 1e-8) << "layer " << li << " bias " << k;
    }
  }
}

TEST(Mlp, RejectsInconsistentLayers) {
  DenseLayer a{2, 3, Activation::tanh, std::vector<double>(6), std::vector<double>(3)};
  DenseLayer b{4, 1, Activation::identity, std::vector<double>(4), std::vector<double>(1)};
  EXPECT_THROW(Mlp(std::vector<DenseLayer>{a, b}), Error);
  DenseLayer c{2, 3, Activation::tanh, std::vector<double>(5), std::vector<double>(3)};
  EXPECT_THROW(Mlp(std::vector<DenseLayer>{c}), Error);
}

TEST(Optimizer, AdamAndSgdDescend) {
  for (bool adaptive : {true, false}) {
    Rng rng(9);
    const std::vector<std::size_t> sizes{3, 8, 1};
    Mlp net(sizes, rng);
    Optimizer opt(net, adaptive ? 1e-2 : 5e-2, adaptive);
    const std::vector<double> x{0.5, -0.2, 0.1};
    auto sq = [&] {
      const double y = net.forward(x)[0] - 2.0;
      return y * y;
    };
    const double before = sq();
    for (int i = 0; i < 200; ++i) {
      Mlp::Tape tape;
      const double y = net.forward(x, tape)[0];
      std::vector<double> g{2.0 * (y - 2.0)};
      auto grads = net.zero_buffers();
      net.backward(tape, g, grads);
      opt.step(net, grads);
    }
    EXPECT_LT(sq(), 0.01 * before) << (adaptive ? "adam" : "sgd");
    EXPECT_EQ(opt.steps(), 200u);
  }
}

TEST(LayerBuffers, NormAndScale) {
  LayerBuffers b;
  b.weight = {{3.0, 4.0}};
  b.bias = {{0.0}};
  EXPECT_EQ(b.squared_norm(), 25.0);
  b.scale(0.5);
  EXPECT_EQ(b.squared_norm(), 6.25);
  EXPECT_TRUE(b.all_finite());
  b.bias[0][0] = std::nan("");
  EXPECT_FALSE(b.all_finite());
  b.zero();
  EXPECT_EQ(b.squared_norm(), 0.0);
}
