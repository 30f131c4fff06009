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

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "jointrl/env.hpp"
#include "jointrl/neural.hpp"
#include "jointrl/rng.hpp"

namespace jointrl {

/// View into a shared, immutable state buffer. Consecutive experiences of one
/// agent share the buffer for s_next / s, and power experiences slice the
/// top-layer buffer.
struct StateRef {
  std::shared_ptr<const std::vector<double>> data;
  std::size_t offset = 0;
  std::size_t length = 0;

  static StateRef whole(std::shared_ptr<const std::vector<double>> d) {
    const std::size_t n = d->size();
    return {std::move(d), 0, n};
  }
  static StateRef slice(std::shared_ptr<const std::vector<double>> d, std::size_t off,
                        std::size_t len) {
    return {std::move(d), off, len};
  }
  std::span<const double> view() const {
    return std::span<const double>(*data).subspan(offset, length);
  }
};

struct ExperienceSubband {
  StateRef s;
  int action = 0;  // 0-based subband, or joint port index
  double reward = 0.0;
  StateRef s_next;
};

struct ExperiencePower {
  StateRef s;
  double action = 0.0;  // [0, 1]
  double reward = 0.0;
  StateRef s_next;      // same subband as s
  int subband = 0;
};

/// Fixed-capacity FIFO replay memory.
template <typename T>
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity = 50000) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  }

  void push(T e) {
    if (buffer_.size() < capacity_) {
      buffer_.push_back(std::move(e));
    } else {
      buffer_[head_] = std::move(e);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return buffer_.size(); }
  std::size_t capacity() const { return capacity_; }
  void clear() {
    buffer_.clear();
    head_ = 0;
  }

  /// i = 0 is the oldest retained experience.
  const T& operator[](std::size_t i) const { return buffer_[(head_ + i) % buffer_.size()]; }

  /// Uniform sampling with replacement.
  std::vector<const T*> sample(std::size_t batch, Rng& rng) const {
    if (buffer_.empty()) throw std::logic_error("cannot sample an empty replay memory");
    std::uniform_int_distribution<std::size_t> pick(0, buffer_.size() - 1);
    std::vector<const T*> out;
    out.reserve(batch);
    for (std::size_t k = 0; k < batch; ++k) out.push_back(&buffer_[pick(rng)]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> buffer_;
};

/// Periodic parameter broadcast with latency. A snapshot captured at slot t
/// (t a positive multiple of the period) becomes active at slot t + delay.
template <typename Snapshot>
class BroadcastSchedule {
 public:
  BroadcastSchedule(int period = 50, int delay = 2) : period_(period), delay_(delay) {
    if (period <= 0 || delay < 0) throw std::invalid_argument("invalid broadcast schedule");
  }

  void reset(Snapshot initial) {
    active_ = std::move(initial);
    active_since_ = 0;
    pending_.clear();
  }

  /// Returns true if a snapshot was captured at this slot.
  template <typename Capture>
  bool capture(int slot, Capture&& fn) {
    if (slot <= 0 || slot % period_ != 0) return false;
    pending_.push_back({slot + delay_, fn()});
    return true;
  }

  /// Activates the newest pending snapshot whose release slot has arrived.
  bool release(int slot) {
    bool changed = false;
    while (!pending_.empty() && pending_.front().release_slot <= slot) {
      active_since_ = pending_.front().release_slot;
      active_ = std::move(pending_.front().snapshot);
      pending_.pop_front();
      changed = true;
    }
    return changed;
  }

  const Snapshot& active() const { return active_; }
  int active_since() const { return active_since_; }
  std::size_t pending() const { return pending_.size(); }
  int period() const { return period_; }
  int delay() const { return delay_; }

 private:
  struct Pending {
    int release_slot;
    Snapshot snapshot;
  };
  int period_;
  int delay_;
  Snapshot active_{};
  int active_since_ = 0;
  std::deque<Pending> pending_;
};

// ---------------------------------------------------------------------------
// Action selection.

/// Lowest index among the maxima.
int argmax_lowest(std::span<const double> values);

/// Greedy over `values` with probability 1 - eps, otherwise uniform.
int epsilon_greedy(std::span<const double> values, double eps, Rng& rng);

int select_subband(const MlpParams& q_net, std::span<const double> top_state, double eps, Rng& rng);

/// Actor output with probability 1 - eps, otherwise uniform on [0, 1].
double select_power(const MlpParams& actor, std::span<const double> subband_state, double eps,
                    Rng& rng);

/// Joint port index = subband * levels + level.
struct JointAction {
  int subband = 0;
  int level = 0;
};
JointAction decode_joint(int index, int levels);
int encode_joint(JointAction a, int levels);

/// Level 0 is silence; levels 1..levels-1 are spaced evenly in dB from
/// P_max - span_db up to P_max.
std::vector<double> joint_power_levels(double p_max_w, int levels, double span_db);

JointAction joint_dqn_action(const MlpParams& q_net, std::span<const double> top_state, double eps,
                             int levels, Rng& rng);

// ---------------------------------------------------------------------------
// Losses and gradients.

double dqn_target(double reward, std::span<const double> q_next_target, double gamma);

struct DqnBatch {
  Eigen::MatrixXd s;
  Eigen::MatrixXd s_next;
  std::vector<int> action;
  Eigen::VectorXd reward;
};
DqnBatch make_dqn_batch(std::span<const ExperienceSubband* const> batch);

Eigen::VectorXd dqn_targets(const MlpParams& q_target, const DqnBatch& batch, double gamma);

/// Mean over the batch of (y - q(s, a))^2; only taken-action ports carry loss.
double dqn_loss(const MlpParams& q_net, const DqnBatch& batch, const Eigen::VectorXd& y);
GradientBundle dqn_gradient(const MlpParams& q_net, const DqnBatch& batch,
                            const Eigen::VectorXd& y, double* loss = nullptr);

struct PowerBatch {
  Eigen::MatrixXd s;
  Eigen::MatrixXd s_next;
  Eigen::RowVectorXd action;
  Eigen::VectorXd reward;
};
PowerBatch make_power_batch(std::span<const ExperiencePower* const> batch);

/// Stacks states with one action row below them.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& s, const Eigen::RowVectorXd& a);

/// r + gamma q(s', mu(s'; actor); critic_target).
Eigen::VectorXd critic_targets(const MlpParams& critic_target, const MlpParams& actor,
                               const PowerBatch& batch, double gamma);
double critic_loss(const MlpParams& critic, const PowerBatch& batch, const Eigen::VectorXd& y);
GradientBundle critic_gradient(const MlpParams& critic, const PowerBatch& batch,
                               const Eigen::VectorXd& y, double* loss = nullptr);

/// dq/da for every sample, given states (columns) and actions.
using ActionGradient =
    std::function<Eigen::RowVectorXd(const Eigen::MatrixXd& s, const Eigen::RowVectorXd& a)>;
ActionGradient critic_action_gradient(const MlpParams& critic);

/// Mean critic value of the actor's own actions.
double actor_objective(const MlpParams& actor, const MlpParams& critic, const Eigen::MatrixXd& s);

/// Gradient of the negated objective, so a descent step on it ascends q.
GradientBundle actor_gradient(const MlpParams& actor, const Eigen::MatrixXd& s,
                              const ActionGradient& dq_da);

// ---------------------------------------------------------------------------
// Replay-level training steps. Each returns nullopt and leaves the network
// untouched when the memory holds fewer than `warmup` experiences.

std::optional<double> dqn_train_step(MlpParams& q_net, AdamOptimizer& opt, const MlpParams& q_target,
                                     const ReplayMemory<ExperienceSubband>& memory,
                                     std::size_t batch_size, std::size_t warmup, double gamma,
                                     double lr, Rng& rng);

std::optional<double> ddpg_critic_step(MlpParams& critic, AdamOptimizer& opt,
                                       const MlpParams& critic_target, const MlpParams& actor,
                                       const ReplayMemory<ExperiencePower>& memory,
                                       std::size_t batch_size, std::size_t warmup, double gamma,
                                       double lr, Rng& rng);

/// Returns the batch's mean critic value before the step.
std::optional<double> ddpg_actor_step(MlpParams& actor, AdamOptimizer& opt, const MlpParams& critic,
                                      const ReplayMemory<ExperiencePower>& memory,
                                      std::size_t batch_size, std::size_t warmup, double lr,
                                      Rng& rng);

// ---------------------------------------------------------------------------
// Schedules and learners.

struct ExplorationSchedule {
  double initial = 0.25;
  double decay = 0.9995;  // per slot
  double at(int slot) const;
};

struct LearningRateSchedule {
  double initial = 1e-4;
  double decay = 0.995;
  int period = 100;  // slots per decay step
  double at(int slot) const;
};

struct LearnerConfig {
  std::vector<int> hidden{256, 128, 64};
  double gamma = 0.5;
  std::size_t replay_capacity = 50000;
  std::size_t batch_size = 128;
  std::size_t warmup = 256;
  double lr_q = 1e-4;
  double lr_critic = 5e-4;
  double lr_actor = 2.5e-4;
  double lr_decay = 0.995;
  int lr_decay_period = 100;
  double eps_top = 0.25;
  double eps_top_decay = 0.9995;
  double eps_bottom = 0.6;
  double eps_bottom_decay = 0.999;
  int target_period = 100;
  int broadcast_period = 50;
  int broadcast_delay = 2;
  AdamConfig adam;
  int power_levels = 10;
  double power_span_db = 32.0;
};

nlohmann::json learner_config_to_json(const LearnerConfig& cfg);
LearnerConfig learner_config_from_json(const nlohmann::json& j);

struct AgentDecision {
  int subband = 0;
  double power_action = 0.0;  // [0, 1] for the two-layer learner
  int port = 0;               // output port chosen by the Q-network
};

struct TickReport {
  int gradient_steps = 0;
  std::optional<double> loss_q;
  std::optional<double> loss_critic;
  std::optional<double> actor_value;
  bool captured = false;
  bool released = false;
};

/// Shared policy driven by a centralized trainer: agents act on the active
/// broadcast snapshot; experiences reach the trainer one slot late.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::string scheme() const = 0;
  /// Q-network output width as reported in the test table.
  virtual std::string output_size_label() const = 0;

  /// Resets exploration, learning rates and the broadcast schedule, and drops
  /// experiences still in flight from the previous deployment.
  virtual void begin_episode() = 0;

  /// Chooses every agent's allocation for `slot`. With `explore` false the
  /// policy is greedy.
  virtual Allocation act(const std::vector<AgentState>& states, int slot, bool explore, Rng& rng,
                         std::vector<AgentDecision>& decisions) const = 0;

  /// Hands the slot's transitions to the trainer queue. They are usable from
  /// slot + 2 on.
  virtual void record(int slot, const std::vector<AgentState>& states,
                      const std::vector<AgentDecision>& decisions, std::span<const double> rewards,
                      const std::vector<AgentState>& next_states) = 0;

  /// Trainer work at the start of `slot`: ingest delayed experiences, one
  /// gradient step per policy, capture/release broadcasts.
  virtual TickReport trainer_tick(int slot, Rng& rng) = 0;

  virtual double epsilon_top(int slot) const = 0;
  virtual double epsilon_bottom(int slot) const = 0;

  /// Switch acting parameters to the trainer's current masters.
  virtual void sync_acting_to_masters() = 0;

  virtual nlohmann::json to_json() const = 0;

  std::shared_ptr<FeatureNormalizer> normalizer() const { return normalizer_; }

 protected:
  std::shared_ptr<FeatureNormalizer> normalizer_;
};

class TwoLayerLearner final : public Learner {
 public:
  struct Snapshot {
    MlpParams q_net;
    MlpParams actor;
  };

  TwoLayerLearner(int num_subbands, int c, LearnerConfig cfg, double p_max_w, Rng& init_rng);

  std::string scheme() const override { return "proposed"; }
  std::string output_size_label() const override;
  void begin_episode() override;
  Allocation act(const std::vector<AgentState>& states, int slot, bool explore, Rng& rng,
                 std::vector<AgentDecision>& decisions) const override;
  void record(int slot, const std::vector<AgentState>& states,
              const std::vector<AgentDecision>& decisions, std::span<const double> rewards,
              const std::vector<AgentState>& next_states) override;
  TickReport trainer_tick(int slot, Rng& rng) override;
  double epsilon_top(int slot) const override;
  double epsilon_bottom(int slot) const override;
  void sync_acting_to_masters() override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<TwoLayerLearner> from_json(const nlohmann::json& j);

  const LearnerConfig& config() const { return cfg_; }
  const MlpParams& q_net() const { return q_net_; }
  const MlpParams& q_target() const { return q_target_; }
  const MlpParams& actor() const { return actor_; }
  const MlpParams& critic() const { return critic_; }
  const MlpParams& critic_target() const { return critic_target_; }
  const Snapshot& acting() const { return broadcast_.active(); }
  const ReplayMemory<ExperienceSubband>& subband_memory() const { return d_subband_; }
  const ReplayMemory<ExperiencePower>& power_memory() const { return d_power_; }
  const BroadcastSchedule<Snapshot>& broadcast() const { return broadcast_; }
  long trainer_steps() const { return q_sync_.count(); }

 private:
  TwoLayerLearner() = default;

  struct Pending {
    int usable_from;
    std::vector<ExperienceSubband> subband;
    std::vector<ExperiencePower> power;
  };

  int num_subbands_ = 1;
  int c_ = 5;
  double p_max_w_ = 1.0;
  LearnerConfig cfg_;
  MlpParams q_net_, q_target_, actor_, critic_, critic_target_;
  AdamOptimizer q_opt_, actor_opt_, critic_opt_;
  TargetSync q_sync_, critic_sync_;
  ReplayMemory<ExperienceSubband> d_subband_{1};
  ReplayMemory<ExperiencePower> d_power_{1};
  BroadcastSchedule<Snapshot> broadcast_;
  std::deque<Pending> pending_;
};

class JointLearner final : public Learner {
 public:
  JointLearner(int num_subbands, int c, LearnerConfig cfg, double p_max_w, Rng& init_rng);

  std::string scheme() const override { return "joint"; }
  std::string output_size_label() const override;
  void begin_episode() override;
  Allocation act(const std::vector<AgentState>& states, int slot, bool explore, Rng& rng,
                 std::vector<AgentDecision>& decisions) const override;
  void record(int slot, const std::vector<AgentState>& states,
              const std::vector<AgentDecision>& decisions, std::span<const double> rewards,
              const std::vector<AgentState>& next_states) override;
  TickReport trainer_tick(int slot, Rng& rng) override;
  double epsilon_top(int slot) const override;
  double epsilon_bottom(int slot) const override { return epsilon_top(slot); }
  void sync_acting_to_masters() override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<JointLearner> from_json(const nlohmann::json& j);

  const MlpParams& q_net() const { return q_net_; }
  const std::vector<double>& power_levels() const { return levels_w_; }

 private:
  JointLearner() = default;

  struct Pending {
    int usable_from;
    std::vector<ExperienceSubband> experiences;
  };

  int num_subbands_ = 1;
  int c_ = 5;
  double p_max_w_ = 1.0;
  LearnerConfig cfg_;
  std::vector<double> levels_w_;
  MlpParams q_net_, q_target_;
  AdamOptimizer q_opt_;
  TargetSync q_sync_;
  ReplayMemory<ExperienceSubband> memory_{1};
  BroadcastSchedule<MlpParams> broadcast_;
  std::deque<Pending> pending_;
};

/// Restores either learner from a checkpoint document.
std::unique_ptr<Learner> learner_from_json(const nlohmann::json& j);

}  // namespace jointrl
