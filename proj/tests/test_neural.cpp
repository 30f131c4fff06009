// Copyright 2026 The jointrl Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "jointrl/neural.hpp"

namespace jointrl {
namespace {

double act(Activation a, double x) {
  switch (a) {
    case Activation::kRelu: return x > 0.0 ? x : 0.0;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
    default: return x;
  }
}

// Straight-line re-evaluation with plain loops.
std::vector<double> naive_forward(const MlpParams& net, std::vector<double> x) {
  for (const auto& layer : net.layers) {
    std::vector<double> y(layer.weight.rows());
    for (int r = 0; r < layer.weight.rows(); ++r) {
      double s = layer.bias(r);
      for (int c = 0; c < layer.weight.cols(); ++c) s += layer.weight(r, c) * x[c];
      y[r] = act(layer.activation, s);
    }
    x = std::move(y);
  }
  return x;
}

std::vector<double> random_vector(int n, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Scalar probe loss sum_k c_k * out_k over a batch, so the upstream
// gradient is c itself.
double probe_loss(const MlpParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& c) {
  return (forward(net, x).array() * c.array()).sum();
}

void check_gradients(const std::vector<int>& sizes, Activation hidden, Activation out,
                     unsigned seed) {
  Rng rng(seed);
  MlpParams net = make_mlp(sizes, hidden, out, rng);
  const int batch = 3;
  Eigen::MatrixXd x(sizes.front(), batch);
  Eigen::MatrixXd c(sizes.back(), batch);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = d(rng);
  for (int i = 0; i < c.size(); ++i) c.data()[i] = d(rng);

  ForwardCache cache;
  forward(net, x, &cache);
  const GradientBundle g = backward(net, cache, c);
  const double h = 1e-5;

  std::uniform_int_distribution<int> pick_layer(0, static_cast<int>(net.layers.size()) - 1);
  for (int probe = 0; probe < 20; ++probe) {
    const int k = pick_layer(rng);
    auto& w = net.layers[k].weight;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(w.size()) - 1);
    const int idx = pick(rng);
    const double saved = w.data()[idx];
    w.data()[idx] = saved + h;
    const double up = probe_loss(net, x, c);
    w.data()[idx] = saved - h;
    const double down = probe_loss(net, x, c);
    w.data()[idx] = saved;
    EXPECT_LT(relative_error(g.weight[k].data()[idx], (up - down) / (2 * h)), 1e-5)
        << "layer " << k << " weight " << idx;

    auto& b = net.layers[k].bias;
    const int bi = probe % static_cast<int>(b.size());
    const double bsaved = b(bi);
    b(bi) = bsaved + h;
    const double bup = probe_loss(net, x, c);
    b(bi) = bsaved - h;
    const double bdown = probe_loss(net, x, c);
    b(bi) = bsaved;
    EXPECT_LT(relative_error(g.bias[k](bi), (bup - bdown) / (2 * h)), 1e-5) << "bias " << bi;
  }
  for (int i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = probe_loss(net, x, c);
    x.data()[i] = saved - h;
    const double down = probe_loss(net, x, c);
    x.data()[i] = saved;
    EXPECT_LT(relative_error(g.input.data()[i], (up - down) / (2 * h)), 1e-5) << "input " << i;
  }
}

TEST(Forward, ZeroWeightsGiveActivatedBias) {
  Rng rng(1);
  const std::vector<int> sizes{3, 2};
  MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kSigmoid, rng);
  net.layers[0].weight.setZero();
  net.layers[0].bias << 0.0, 2.0;
  const auto y = forward(net, std::vector<double>{1.0, -4.0, 9.0});
  EXPECT_DOUBLE_EQ(y(0), 0.5);
  EXPECT_DOUBLE_EQ(y(1), 1.0 / (1.0 + std::exp(-2.0)));
}

TEST(Forward, HandSetAffineLayer) {
  Rng rng(1);
  const std::vector<int> sizes{2, 2};
  MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  net.layers[0].weight << 1.0, 2.0, 3.0, 4.0;
  net.layers[0].bias << 0.5, -0.5;
  const auto y = forward(net, std::vector<double>{1.0, -1.0});
  EXPECT_DOUBLE_EQ(y(0), -0.5);
  EXPECT_DOUBLE_EQ(y(1), -1.5);
}

TEST(Forward, MatchesNaiveEvaluationAndIsDeterministic) {
  Rng rng(2);
  const std::vector<int> sizes{7, 16, 9, 4};
  for (auto out : {Activation::kIdentity, Activation::kSigmoid}) {
    const MlpParams net = make_mlp(sizes, Activation::kRelu, out, rng);
    const auto x = random_vector(7, rng);
    const auto fast = forward(net, x);
    const auto slow = naive_forward(net, x);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(fast(i), slow[i], 1e-12);
    const auto again = forward(net, x);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(fast(i), again(i));
  }
}

TEST(Forward, ShapeMismatchThrows) {
  Rng rng(3);
  const std::vector<int> sizes{3, 2};
  const MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  EXPECT_THROW(forward(net, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(Init, FanInBoundsAndShape) {
  Rng rng(4);
  const std::vector<int> sizes{50, 256, 128, 64, 4};
  const MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  EXPECT_EQ(net.layer_sizes(), sizes);
  EXPECT_EQ(net.parameter_count(), 50u * 256 + 256 + 256 * 128 + 128 + 128 * 64 + 64 + 64 * 4 + 4);
  for (const auto& layer : net.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    EXPECT_LE(layer.weight.cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(layer.bias.cwiseAbs().maxCoeff(), bound);
  }
}

TEST(Backward, ZeroUpstreamGivesZeroBundle) {
  Rng rng(5);
  const std::vector<int> sizes{4, 8, 3};
  const MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  ForwardCache cache;
  forward(net, x, &cache);
  const auto g = backward(net, cache, Eigen::MatrixXd::Zero(3, 2));
  EXPECT_EQ(g.squared_norm(), 0.0);
  EXPECT_EQ(g.input.norm(), 0.0);
}

TEST(Backward, MissingCacheThrows) {
  Rng rng(5);
  const std::vector<int> sizes{4, 3};
  const MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  EXPECT_THROW(backward(net, ForwardCache{}, Eigen::MatrixXd::Zero(3, 1)), std::logic_error);
}

TEST(Backward, FiniteDifferencesTwoLayers) {
  check_gradients({5, 7, 3}, Activation::kRelu, Activation::kIdentity, 11);
  check_gradients({5, 7, 1}, Activation::kRelu, Activation::kSigmoid, 12);
  check_gradients({5, 7, 3}, Activation::kSigmoid, Activation::kIdentity, 13);
}

TEST(Backward, FiniteDifferencesThreeLayers) {
  check_gradients({6, 9, 5, 2}, Activation::kRelu, Activation::kIdentity, 21);
  check_gradients({6, 9, 5, 1}, Activation::kRelu, Activation::kSigmoid, 22);
  check_gradients({6, 9, 5, 2}, Activation::kIdentity, Activation::kSigmoid, 23);
}

TEST(Backward, FiniteDifferencesFourLayers) {
  check_gradients({8, 12, 10, 6, 4}, Activation::kRelu, Activation::kIdentity, 31);
  check_gradients({8, 12, 10, 6, 1}, Activation::kRelu, Activation::kSigmoid, 32);
  check_gradients({8, 12, 10, 6, 4}, Activation::kSigmoid, Activation::kSigmoid, 33);
}

MlpParams scalar_net(double w) {
  Rng rng(1);
  const std::vector<int> sizes{1, 1};
  MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  net.layers[0].weight(0, 0) = w;
  net.layers[0].bias(0) = 0.0;
  return net;
}

TEST(Adam, ZeroGradientLeavesParameters) {
  MlpParams net = scalar_net(0.3);
  AdamOptimizer opt(net);
  opt.apply(net, GradientBundle::zeros_like(net), 1e-3);
  EXPECT_EQ(net.layers[0].weight(0, 0), 0.3);
  auto g = GradientBundle::zeros_like(net);
  g.weight[0](0, 0) = 0.4;
  opt.apply(net, g, 1e-3);
  const MlpParams before = net;
  const double m_before = opt.first_moment().weight[0](0, 0);
  opt.apply(net, GradientBundle::zeros_like(net), 1e-3);
  EXPECT_NEAR(opt.first_moment().weight[0](0, 0), 0.9 * m_before, 1e-15);
  // The bias-corrected first moment is not zero, so only the zero-gradient
  // entries stay fixed.
  EXPECT_EQ(net.layers[0].bias(0), before.layers[0].bias(0));
}

TEST(Adam, HandRecursionOneStepAndTwoSteps) {
  MlpParams net = scalar_net(1.0);
  AdamOptimizer opt(net);
  auto g = GradientBundle::zeros_like(net);
  g.weight[0](0, 0) = 0.5;
  const double lr = 0.01;
  opt.apply(net, g, lr);
  double m = 0.1 * 0.5, v = 0.001 * 0.25;
  double w = 1.0 - lr * (m / 0.1) / (std::sqrt(v / 0.001) + 1e-8);
  EXPECT_NEAR(net.layers[0].weight(0, 0), w, 1e-12);

  g.weight[0](0, 0) = -0.2;
  opt.apply(net, g, lr);
  m = 0.9 * m + 0.1 * -0.2;
  v = 0.999 * v + 0.001 * 0.04;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  w -= lr * mh / (std::sqrt(vh) + 1e-8);
  EXPECT_NEAR(net.layers[0].weight(0, 0), w, 1e-12);
  EXPECT_EQ(opt.steps(), 2);
}

TEST(Adam, ClipsByGlobalNorm) {
  MlpParams a = scalar_net(0.0), b = scalar_net(0.0);
  AdamOptimizer oa(a), ob(b);
  auto big = GradientBundle::zeros_like(a);
  big.weight[0](0, 0) = 30.0;
  big.bias[0](0) = 40.0;
  auto unit = GradientBundle::zeros_like(b);
  unit.weight[0](0, 0) = 0.6;
  unit.bias[0](0) = 0.8;
  oa.apply(a, big, 0.1);
  ob.apply(b, unit, 0.1);
  EXPECT_NEAR(oa.first_moment().weight[0](0, 0), ob.first_moment().weight[0](0, 0), 1e-15);
  EXPECT_NEAR(oa.second_moment().bias[0](0), ob.second_moment().bias[0](0), 1e-15);
}

TEST(Adam, ConvergesOnQuadraticBowl) {
  MlpParams net = scalar_net(1.0);
  AdamOptimizer opt(net);
  int steps = 0;
  for (; steps < 2000; ++steps) {
    auto g = GradientBundle::zeros_like(net);
    g.weight[0](0, 0) = 2.0 * net.layers[0].weight(0, 0);
    opt.apply(net, g, 0.01);
  }
  EXPECT_LT(std::abs(net.layers[0].weight(0, 0)), 1e-3);
}

TEST(Adam, RejectsNonFiniteGradient) {
  MlpParams net = scalar_net(1.0);
  AdamOptimizer opt(net);
  auto g = GradientBundle::zeros_like(net);
  g.weight[0](0, 0) = std::nan("");
  EXPECT_THROW(opt.apply(net, g, 0.01), std::domain_error);
  EXPECT_EQ(net.layers[0].weight(0, 0), 1.0);
  EXPECT_EQ(opt.steps(), 0);
}

TEST(Adam, SmallStepDecreasesQuadraticLoss) {
  Rng rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> sizes{4, 10, 6, 2};
    MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
    Eigen::MatrixXd x(4, 8), y(2, 8);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < x.size(); ++i) x.data()[i] = d(rng);
    for (int i = 0; i < y.size(); ++i) y.data()[i] = d(rng);
    auto loss = [&] { return (forward(net, x) - y).squaredNorm() / 8.0; };
    const double before = loss();
    ForwardCache cache;
    const Eigen::MatrixXd out = forward(net, x, &cache);
    const auto g = backward(net, cache, 2.0 * (out - y) / 8.0);
    AdamOptimizer opt(net, AdamConfig{0.9, 0.999, 1e-8, 0.0});
    opt.apply(net, g, 1e-6);
    EXPECT_LE(loss(), before);
  }
}

TEST(Adam, JsonRoundTrip) {
  Rng rng(9);
  const std::vector<int> sizes{3, 5, 2};
  MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  AdamOptimizer opt(net);
  auto g = GradientBundle::zeros_like(net);
  g.weight[1].setConstant(0.3);
  opt.apply(net, g, 0.01);
  const AdamOptimizer back = AdamOptimizer::from_json(opt.to_json());
  EXPECT_EQ(back.steps(), 1);
  EXPECT_EQ(back.first_moment().weight[1], opt.first_moment().weight[1]);
  EXPECT_EQ(back.second_moment().weight[1], opt.second_moment().weight[1]);
}

TEST(Target, SyncPeriodTrace) {
  Rng rng(6);
  const std::vector<int> sizes{3, 4, 2};
  MlpParams online = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  MlpParams target = online;
  TargetSync sync(100);
  std::vector<long> copies;
  for (int step = 1; step <= 300; ++step) {
    online.layers[0].weight(0, 0) += 0.01;
    const double frozen = target.layers[0].weight(0, 0);
    if (sync.tick(online, target)) {
      copies.push_back(sync.count());
      EXPECT_EQ(target.layers[0].weight, online.layers[0].weight);
    } else {
      EXPECT_EQ(target.layers[0].weight(0, 0), frozen);
      EXPECT_NE(target.layers[0].weight(0, 0), online.layers[0].weight(0, 0));
    }
  }
  EXPECT_EQ(copies, (std::vector<long>{100, 200, 300}));
}

TEST(Target, HardUpdateCopies) {
  Rng rng(7);
  const std::vector<int> sizes{3, 4, 2};
  const MlpParams online = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  MlpParams target = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  hard_update(online, target);
  for (std::size_t k = 0; k < online.layers.size(); ++k) {
    EXPECT_EQ(target.layers[k].weight, online.layers[k].weight);
    EXPECT_EQ(target.layers[k].bias, online.layers[k].bias);
  }
}

TEST(Serialization, MlpRoundTripIsExact) {
  Rng rng(8);
  const std::vector<int> sizes{5, 7, 3, 1};
  const MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kSigmoid, rng);
  const MlpParams back = mlp_from_json(nlohmann::json::parse(mlp_to_json(net).dump()));
  ASSERT_EQ(back.layer_sizes(), net.layer_sizes());
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    EXPECT_EQ(back.layers[k].weight, net.layers[k].weight);
    EXPECT_EQ(back.layers[k].bias, net.layers[k].bias);
    EXPECT_EQ(back.layers[k].activation, net.layers[k].activation);
  }
}

}  // namespace
}  // namespace jointrl
