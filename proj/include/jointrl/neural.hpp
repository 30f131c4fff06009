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

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "jointrl/rng.hpp"

namespace jointrl {

enum class Activation { kIdentity, kRelu, kSigmoid };

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Activation activation = Activation::kIdentity;
};

/// Feed-forward network parameters. Samples are columns throughout.
struct MlpParams {
  std::vector<DenseLayer> layers;

  int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }
  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
  bool all_finite() const;
};

/// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights
/// and biases.
MlpParams make_mlp(std::span<const int> sizes, Activation hidden, Activation output, Rng& rng);

struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // inputs[k] feeds layer k; back() is the output
  std::vector<Eigen::MatrixXd> pre;     // pre-activations per layer
};

Eigen::MatrixXd forward(const MlpParams& net, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const MlpParams& net, std::span<const double> x);

struct GradientBundle {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;  // d loss / d x, one column per sample

  static GradientBundle zeros_like(const MlpParams& net);
  double squared_norm() const;  // parameters only
  bool all_finite() const;
  void scale(double factor);
  void add(const GradientBundle& other);
};

/// Exact gradients given d loss / d output for every cached sample.
GradientBundle backward(const MlpParams& net, const ForwardCache& cache,
                        const Eigen::MatrixXd& upstream);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 1.0;  // global-norm clip; <= 0 disables
};

/// Adaptive-moment optimizer state for one network.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const MlpParams& net, AdamConfig cfg = {});

  /// Clips, updates the moments, and steps `net`. Throws std::domain_error
  /// before touching anything if the gradient is not finite.
  void apply(MlpParams& net, GradientBundle grad, double lr);

  long steps() const { return steps_; }
  const AdamConfig& config() const { return cfg_; }
  const GradientBundle& first_moment() const { return m_; }
  const GradientBundle& second_moment() const { return v_; }

  nlohmann::json to_json() const;
  static AdamOptimizer from_json(const nlohmann::json& j);

 private:
  AdamConfig cfg_;
  long steps_ = 0;
  GradientBundle m_;
  GradientBundle v_;
};

/// Copies online parameters into the target.
void hard_update(const MlpParams& online, MlpParams& target);

/// Counts trainer steps and performs a hard copy every `period` of them.
class TargetSync {
 public:
  explicit TargetSync(int period = 100) : period_(period) {}

  /// Returns true when this step triggered a copy.
  bool tick(const MlpParams& online, MlpParams& target);
  long count() const { return count_; }
  int period() const { return period_; }
  void set_count(long c) { count_ = c; }

 private:
  int period_;
  long count_ = 0;
};

nlohmann::json mlp_to_json(const MlpParams& net);
MlpParams mlp_from_json(const nlohmann::json& j);

}  // namespace jointrl
