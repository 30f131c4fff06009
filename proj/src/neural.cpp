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

#include "jointrl/neural.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jointrl {

namespace {

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::kIdentity:
      return z;
    case Activation::kRelu:
      return z.cwiseMax(0.0);
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  }
  return z;
}

// d activation / d z evaluated from pre-activation z and output y.
Eigen::MatrixXd activation_slope(Activation a, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  switch (a) {
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
    case Activation::kRelu:
      return (z.array() > 0.0).cast<double>().matrix();
    case Activation::kSigmoid:
      return (y.array() * (1.0 - y.array())).matrix();
  }
  return Eigen::MatrixXd::Ones(z.rows(), z.cols());
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_name(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw std::invalid_argument("unknown activation " + s);
}

}  // namespace

std::vector<int> MlpParams::layer_sizes() const {
  std::vector<int> sizes;
  if (layers.empty()) return sizes;
  sizes.push_back(input_size());
  for (const auto& l : layers) sizes.push_back(static_cast<int>(l.weight.rows()));
  return sizes;
}

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) count += l.weight.size() + l.bias.size();
  return count;
}

bool MlpParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

MlpParams make_mlp(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("an MLP needs at least two layer sizes");
  MlpParams net;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    const int fan_in = sizes[k];
    const int fan_out = sizes[k + 1];
    if (fan_in <= 0 || fan_out <= 0) throw std::invalid_argument("layer widths must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    DenseLayer layer;
    layer.weight.resize(fan_out, fan_in);
    layer.bias.resize(fan_out);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
    layer.activation = (k + 2 == sizes.size()) ? output : hidden;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Eigen::MatrixXd forward(const MlpParams& net, const Eigen::MatrixXd& x, ForwardCache* cache) {
  if (x.rows() != net.input_size()) {
    throw std::invalid_argument("input has " + std::to_string(x.rows()) + " rows, network expects " +
                                std::to_string(net.input_size()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
    cache->inputs.push_back(x);
  }
  Eigen::MatrixXd a = x;
  for (const auto& layer : net.layers) {
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    a = activate(layer.activation, z);
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->inputs.push_back(a);
    }
  }
  return a;
}

Eigen::VectorXd forward(const MlpParams& net, std::span<const double> x) {
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  return forward(net, Eigen::MatrixXd(v)).col(0);
}

GradientBundle GradientBundle::zeros_like(const MlpParams& net) {
  GradientBundle g;
  for (const auto& l : net.layers) {
    g.weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return g;
}

double GradientBundle::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weight) s += w.squaredNorm();
  for (const auto& b : bias) s += b.squaredNorm();
  return s;
}

bool GradientBundle::all_finite() const {
  for (const auto& w : weight) if (!w.allFinite()) return false;
  for (const auto& b : bias) if (!b.allFinite()) return false;
  return true;
}

void GradientBundle::scale(double factor) {
  for (auto& w : weight) w *= factor;
  for (auto& b : bias) b *= factor;
  input *= factor;
}

void GradientBundle::add(const GradientBundle& other) {
  for (std::size_t k = 0; k < weight.size(); ++k) {
    weight[k] += other.weight[k];
    bias[k] += other.bias[k];
  }
}

GradientBundle backward(const MlpParams& net, const ForwardCache& cache,
                        const Eigen::MatrixXd& upstream) {
  const std::size_t depth = net.layers.size();
  if (cache.pre.size() != depth || cache.inputs.size() != depth + 1) {
    throw std::logic_error("backward called without a matching forward cache");
  }
  if (upstream.rows() != net.output_size() || upstream.cols() != cache.inputs.front().cols()) {
    throw std::invalid_argument("upstream gradient shape does not match the cached batch");
  }
  GradientBundle g;
  g.weight.resize(depth);
  g.bias.resize(depth);
  Eigen::MatrixXd delta = upstream;
  for (std::size_t k = depth; k-- > 0;) {
    const auto& layer = net.layers[k];
    delta = delta.cwiseProduct(activation_slope(layer.activation, cache.pre[k], cache.inputs[k + 1]));
    g.weight[k].noalias() = delta * cache.inputs[k].transpose();
    g.bias[k] = delta.rowwise().sum();
    Eigen::MatrixXd next = layer.weight.transpose() * delta;
    delta = std::move(next);
  }
  g.input = std::move(delta);
  return g;
}

AdamOptimizer::AdamOptimizer(const MlpParams& net, AdamConfig cfg)
    : cfg_(cfg), m_(GradientBundle::zeros_like(net)), v_(GradientBundle::zeros_like(net)) {}

void AdamOptimizer::apply(MlpParams& net, GradientBundle grad, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (grad.weight.size() != net.layers.size() || m_.weight.size() != net.layers.size()) {
    throw std::invalid_argument("gradient does not match network shape");
  }
  if (!grad.all_finite()) {
    throw std::domain_error("non-finite gradient at optimizer step " + std::to_string(steps_ + 1));
  }
  if (cfg_.clip_norm > 0.0) {
    const double norm = std::sqrt(grad.squared_norm());
    if (norm > cfg_.clip_norm) grad.scale(cfg_.clip_norm / norm);
  }
  ++steps_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double eps = cfg_.epsilon;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    update(net.layers[k].weight, m_.weight[k], v_.weight[k], grad.weight[k]);
    update(net.layers[k].bias, m_.bias[k], v_.bias[k], grad.bias[k]);
  }
  if (!net.all_finite()) {
    throw std::domain_error("parameters became non-finite at optimizer step " + std::to_string(steps_));
  }
}

namespace {

nlohmann::json bundle_to_json(const GradientBundle& g) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t k = 0; k < g.weight.size(); ++k) {
    layers.push_back({{"w", std::vector<double>(g.weight[k].data(), g.weight[k].data() + g.weight[k].size())},
                      {"b", std::vector<double>(g.bias[k].data(), g.bias[k].data() + g.bias[k].size())},
                      {"rows", g.weight[k].rows()},
                      {"cols", g.weight[k].cols()}});
  }
  return layers;
}

GradientBundle bundle_from_json(const nlohmann::json& j) {
  GradientBundle g;
  for (const auto& layer : j) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("w").get<std::vector<double>>();
    const auto b = layer.at("b").get<std::vector<double>>();
    g.weight.push_back(Eigen::Map<const Eigen::MatrixXd>(w.data(), rows, cols));
    g.bias.push_back(Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
  }
  return g;
}

}  // namespace

nlohmann::json AdamOptimizer::to_json() const {
  return {{"beta1", cfg_.beta1}, {"beta2", cfg_.beta2},   {"epsilon", cfg_.epsilon},
          {"clip_norm", cfg_.clip_norm}, {"steps", steps_}, {"m", bundle_to_json(m_)},
          {"v", bundle_to_json(v_)}};
}

AdamOptimizer AdamOptimizer::from_json(const nlohmann::json& j) {
  AdamOptimizer opt;
  opt.cfg_ = {j.at("beta1").get<double>(), j.at("beta2").get<double>(), j.at("epsilon").get<double>(),
              j.at("clip_norm").get<double>()};
  opt.steps_ = j.at("steps").get<long>();
  opt.m_ = bundle_from_json(j.at("m"));
  opt.v_ = bundle_from_json(j.at("v"));
  return opt;
}

void hard_update(const MlpParams& online, MlpParams& target) {
  if (online.layer_sizes() != target.layer_sizes()) {
    throw std::invalid_argument("target network shape does not match online network");
  }
  target = online;
}

bool TargetSync::tick(const MlpParams& online, MlpParams& target) {
  ++count_;
  if (period_ > 0 && count_ % period_ == 0) {
    hard_update(online, target);
    return true;
  }
  return false;
}

nlohmann::json mlp_to_json(const MlpParams& net) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes();
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"activation", activation_name(l.activation)},
                      {"w", std::vector<double>(l.weight.data(), l.weight.data() + l.weight.size())},
                      {"b", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  j["layers"] = layers;
  return j;
}

MlpParams mlp_from_json(const nlohmann::json& j) {
  const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
  const auto& layers = j.at("layers");
  if (sizes.size() != layers.size() + 1) throw std::invalid_argument("layer header mismatch");
  MlpParams net;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto w = layers[k].at("w").get<std::vector<double>>();
    const auto b = layers[k].at("b").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(sizes[k]) * sizes[k + 1] ||
        b.size() != static_cast<std::size_t>(sizes[k + 1])) {
      throw std::invalid_argument("layer " + std::to_string(k) + " has wrong parameter count");
    }
    DenseLayer layer;
    layer.weight = Eigen::Map<const Eigen::MatrixXd>(w.data(), sizes[k + 1], sizes[k]);
    layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), sizes[k + 1]);
    layer.activation = activation_from_name(layers[k].at("activation").get<std::string>());
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace jointrl
