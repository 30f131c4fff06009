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

#include "jointrl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace jointrl {

namespace {

Eigen::MatrixXd stack_columns(std::span<const std::span<const double>> cols) {
  const Eigen::Index rows = cols.empty() ? 0 : static_cast<Eigen::Index>(cols.front().size());
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (static_cast<Eigen::Index>(cols[k].size()) != rows) {
      throw std::invalid_argument("states in one batch differ in length");
    }
    out.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::VectorXd>(cols[k].data(), rows);
  }
  return out;
}

std::vector<int> network_sizes(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

}  // namespace

// ---------------------------------------------------------------------------
// Action selection.

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty range");
  int best = 0;
  for (int k = 1; k < static_cast<int>(values.size()); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

int epsilon_greedy(std::span<const double> values, double eps, Rng& rng) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (uniform01(rng) < eps) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(values.size()) - 1);
    return pick(rng);
  }
  return argmax_lowest(values);
}

int select_subband(const MlpParams& q_net, std::span<const double> top_state, double eps,
                   Rng& rng) {
  const Eigen::VectorXd q = forward(q_net, top_state);
  return epsilon_greedy(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())), eps,
                        rng);
}

double select_power(const MlpParams& actor, std::span<const double> subband_state, double eps,
                    Rng& rng) {
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (uniform01(rng) < eps) return uniform01(rng);
  return std::clamp(forward(actor, subband_state)(0), 0.0, 1.0);
}

JointAction decode_joint(int index, int levels) { return {index / levels, index % levels}; }

int encode_joint(JointAction a, int levels) { return a.subband * levels + a.level; }

std::vector<double> joint_power_levels(double p_max_w, int levels, double span_db) {
  if (levels < 2) throw std::invalid_argument("need at least two power levels");
  std::vector<double> out(levels, 0.0);
  const double p_max_db = 10.0 * std::log10(p_max_w);
  for (int k = 1; k < levels; ++k) {
    const double frac = levels > 2 ? static_cast<double>(k - 1) / (levels - 2) : 1.0;
    out[k] = std::pow(10.0, (p_max_db - span_db + span_db * frac) / 10.0);
  }
  out.back() = p_max_w;
  return out;
}

JointAction joint_dqn_action(const MlpParams& q_net, std::span<const double> top_state, double eps,
                             int levels, Rng& rng) {
  return decode_joint(select_subband(q_net, top_state, eps, rng), levels);
}

// ---------------------------------------------------------------------------
// Losses and gradients.

double dqn_target(double reward, std::span<const double> q_next_target, double gamma) {
  double best = q_next_target[argmax_lowest(q_next_target)];
  return reward + gamma * best;
}

DqnBatch make_dqn_batch(std::span<const ExperienceSubband* const> batch) {
  std::vector<std::span<const double>> s;
  std::vector<std::span<const double>> s_next;
  DqnBatch out;
  out.reward.resize(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    s.push_back(batch[k]->s.view());
    s_next.push_back(batch[k]->s_next.view());
    out.action.push_back(batch[k]->action);
    out.reward(static_cast<Eigen::Index>(k)) = batch[k]->reward;
  }
  out.s = stack_columns(s);
  out.s_next = stack_columns(s_next);
  return out;
}

Eigen::VectorXd dqn_targets(const MlpParams& q_target, const DqnBatch& batch, double gamma) {
  const Eigen::MatrixXd q_next = forward(q_target, batch.s_next);
  Eigen::VectorXd y(q_next.cols());
  for (Eigen::Index b = 0; b < q_next.cols(); ++b) {
    y(b) = batch.reward(b) + gamma * q_next.col(b).maxCoeff();
  }
  return y;
}

double dqn_loss(const MlpParams& q_net, const DqnBatch& batch, const Eigen::VectorXd& y) {
  const Eigen::MatrixXd q = forward(q_net, batch.s);
  double loss = 0.0;
  for (Eigen::Index b = 0; b < q.cols(); ++b) {
    const double diff = y(b) - q(batch.action[b], b);
    loss += diff * diff;
  }
  return loss / static_cast<double>(q.cols());
}

GradientBundle dqn_gradient(const MlpParams& q_net, const DqnBatch& batch,
                            const Eigen::VectorXd& y, double* loss) {
  ForwardCache cache;
  const Eigen::MatrixXd q = forward(q_net, batch.s, &cache);
  const double inv_b = 1.0 / static_cast<double>(q.cols());
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < q.cols(); ++b) {
    const int a = batch.action[b];
    if (a < 0 || a >= q.rows()) throw std::invalid_argument("action outside the Q-network outputs");
    const double diff = y(b) - q(a, b);
    total += diff * diff;
    upstream(a, b) = -2.0 * diff * inv_b;
  }
  if (loss) *loss = total * inv_b;
  return backward(q_net, cache, upstream);
}

PowerBatch make_power_batch(std::span<const ExperiencePower* const> batch) {
  std::vector<std::span<const double>> s;
  std::vector<std::span<const double>> s_next;
  PowerBatch out;
  out.action.resize(static_cast<Eigen::Index>(batch.size()));
  out.reward.resize(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t k = 0; k < batch.size(); ++k) {
    s.push_back(batch[k]->s.view());
    s_next.push_back(batch[k]->s_next.view());
    out.action(static_cast<Eigen::Index>(k)) = batch[k]->action;
    out.reward(static_cast<Eigen::Index>(k)) = batch[k]->reward;
  }
  out.s = stack_columns(s);
  out.s_next = stack_columns(s_next);
  return out;
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& s, const Eigen::RowVectorXd& a) {
  Eigen::MatrixXd x(s.rows() + 1, s.cols());
  x.topRows(s.rows()) = s;
  x.bottomRows(1) = a;
  return x;
}

Eigen::VectorXd critic_targets(const MlpParams& critic_target, const MlpParams& actor,
                               const PowerBatch& batch, double gamma) {
  const Eigen::RowVectorXd mu_next = forward(actor, batch.s_next).row(0);
  const Eigen::RowVectorXd q_next = forward(critic_target, critic_input(batch.s_next, mu_next)).row(0);
  return batch.reward + gamma * q_next.transpose();
}

double critic_loss(const MlpParams& critic, const PowerBatch& batch, const Eigen::VectorXd& y) {
  const Eigen::RowVectorXd q = forward(critic, critic_input(batch.s, batch.action)).row(0);
  return (y - q.transpose()).squaredNorm() / static_cast<double>(q.size());
}

GradientBundle critic_gradient(const MlpParams& critic, const PowerBatch& batch,
                               const Eigen::VectorXd& y, double* loss) {
  ForwardCache cache;
  const Eigen::MatrixXd q = forward(critic, critic_input(batch.s, batch.action), &cache);
  const double inv_b = 1.0 / static_cast<double>(q.cols());
  const Eigen::RowVectorXd diff = y.transpose() - q.row(0);
  if (loss) *loss = diff.squaredNorm() * inv_b;
  const Eigen::MatrixXd upstream = -2.0 * inv_b * diff;
  return backward(critic, cache, upstream);
}

ActionGradient critic_action_gradient(const MlpParams& critic) {
  return [&critic](const Eigen::MatrixXd& s, const Eigen::RowVectorXd& a) {
    ForwardCache cache;
    const Eigen::MatrixXd q = forward(critic, critic_input(s, a), &cache);
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(1, q.cols());
    const GradientBundle g = backward(critic, cache, ones);
    return Eigen::RowVectorXd(g.input.bottomRows(1));
  };
}

double actor_objective(const MlpParams& actor, const MlpParams& critic, const Eigen::MatrixXd& s) {
  const Eigen::RowVectorXd mu = forward(actor, s).row(0);
  return forward(critic, critic_input(s, mu)).row(0).mean();
}

GradientBundle actor_gradient(const MlpParams& actor, const Eigen::MatrixXd& s,
                              const ActionGradient& dq_da) {
  ForwardCache cache;
  const Eigen::MatrixXd mu = forward(actor, s, &cache);
  const Eigen::RowVectorXd slope = dq_da(s, mu.row(0));
  const Eigen::MatrixXd upstream = -slope / static_cast<double>(s.cols());
  return backward(actor, cache, upstream);
}

// ---------------------------------------------------------------------------

std::optional<double> dqn_train_step(MlpParams& q_net, AdamOptimizer& opt, const MlpParams& q_target,
                                     const ReplayMemory<ExperienceSubband>& memory,
                                     std::size_t batch_size, std::size_t warmup, double gamma,
                                     double lr, Rng& rng) {
  if (memory.size() < std::max(batch_size, warmup)) return std::nullopt;
  const auto sample = memory.sample(batch_size, rng);
  const DqnBatch batch = make_dqn_batch(sample);
  const Eigen::VectorXd y = dqn_targets(q_target, batch, gamma);
  double loss = 0.0;
  GradientBundle g = dqn_gradient(q_net, batch, y, &loss);
  opt.apply(q_net, std::move(g), lr);
  return loss;
}

std::optional<double> ddpg_critic_step(MlpParams& critic, AdamOptimizer& opt,
                                       const MlpParams& critic_target, const MlpParams& actor,
                                       const ReplayMemory<ExperiencePower>& memory,
                                       std::size_t batch_size, std::size_t warmup, double gamma,
                                       double lr, Rng& rng) {
  if (memory.size() < std::max(batch_size, warmup)) return std::nullopt;
  const auto sample = memory.sample(batch_size, rng);
  const PowerBatch batch = make_power_batch(sample);
  const Eigen::VectorXd y = critic_targets(critic_target, actor, batch, gamma);
  double loss = 0.0;
  GradientBundle g = critic_gradient(critic, batch, y, &loss);
  opt.apply(critic, std::move(g), lr);
  return loss;
}

std::optional<double> ddpg_actor_step(MlpParams& actor, AdamOptimizer& opt, const MlpParams& critic,
                                      const ReplayMemory<ExperiencePower>& memory,
                                      std::size_t batch_size, std::size_t warmup, double lr,
                                      Rng& rng) {
  if (memory.size() < std::max(batch_size, warmup)) return std::nullopt;
  const auto sample = memory.sample(batch_size, rng);
  const PowerBatch batch = make_power_batch(sample);
  const double value = actor_objective(actor, critic, batch.s);
  GradientBundle g = actor_gradient(actor, batch.s, critic_action_gradient(critic));
  opt.apply(actor, std::move(g), lr);
  return value;
}

// ---------------------------------------------------------------------------

double ExplorationSchedule::at(int slot) const {
  return initial * std::pow(decay, static_cast<double>(std::max(slot, 0)));
}

double LearningRateSchedule::at(int slot) const {
  return initial * std::pow(decay, static_cast<double>(std::max(slot, 0) / period));
}

nlohmann::json learner_config_to_json(const LearnerConfig& c) {
  return {{"hidden", c.hidden},
          {"gamma", c.gamma},
          {"replay_capacity", c.replay_capacity},
          {"batch_size", c.batch_size},
          {"warmup", c.warmup},
          {"lr_q", c.lr_q},
          {"lr_critic", c.lr_critic},
          {"lr_actor", c.lr_actor},
          {"lr_decay", c.lr_decay},
          {"lr_decay_period", c.lr_decay_period},
          {"eps_top", c.eps_top},
          {"eps_top_decay", c.eps_top_decay},
          {"eps_bottom", c.eps_bottom},
          {"eps_bottom_decay", c.eps_bottom_decay},
          {"target_period", c.target_period},
          {"broadcast_period", c.broadcast_period},
          {"broadcast_delay", c.broadcast_delay},
          {"adam_beta1", c.adam.beta1},
          {"adam_beta2", c.adam.beta2},
          {"adam_epsilon", c.adam.epsilon},
          {"clip_norm", c.adam.clip_norm},
          {"power_levels", c.power_levels},
          {"power_span_db", c.power_span_db}};
}

LearnerConfig learner_config_from_json(const nlohmann::json& j) {
  LearnerConfig c;
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("hidden", c.hidden);
  get("gamma", c.gamma);
  get("replay_capacity", c.replay_capacity);
  get("batch_size", c.batch_size);
  get("warmup", c.warmup);
  get("lr_q", c.lr_q);
  get("lr_critic", c.lr_critic);
  get("lr_actor", c.lr_actor);
  get("lr_decay", c.lr_decay);
  get("lr_decay_period", c.lr_decay_period);
  get("eps_top", c.eps_top);
  get("eps_top_decay", c.eps_top_decay);
  get("eps_bottom", c.eps_bottom);
  get("eps_bottom_decay", c.eps_bottom_decay);
  get("target_period", c.target_period);
  get("broadcast_period", c.broadcast_period);
  get("broadcast_delay", c.broadcast_delay);
  get("adam_beta1", c.adam.beta1);
  get("adam_beta2", c.adam.beta2);
  get("adam_epsilon", c.adam.epsilon);
  get("clip_norm", c.adam.clip_norm);
  get("power_levels", c.power_levels);
  get("power_span_db", c.power_span_db);
  return c;
}

// ---------------------------------------------------------------------------
// Two-layer learner.

TwoLayerLearner::TwoLayerLearner(int num_subbands, int c, LearnerConfig cfg, double p_max_w,
                                 Rng& init_rng)
    : num_subbands_(num_subbands),
      c_(c),
      p_max_w_(p_max_w),
      cfg_(std::move(cfg)),
      q_sync_(cfg_.target_period),
      critic_sync_(cfg_.target_period),
      d_subband_(cfg_.replay_capacity),
      d_power_(cfg_.replay_capacity),
      broadcast_(cfg_.broadcast_period, cfg_.broadcast_delay) {
  const int per_subband = state_length(c);
  const auto q_sizes = network_sizes(per_subband * num_subbands, cfg_.hidden, num_subbands);
  const auto actor_sizes = network_sizes(per_subband, cfg_.hidden, 1);
  const auto critic_sizes = network_sizes(per_subband + 1, cfg_.hidden, 1);
  q_net_ = make_mlp(q_sizes, Activation::kRelu, Activation::kIdentity, init_rng);
  actor_ = make_mlp(actor_sizes, Activation::kRelu, Activation::kSigmoid, init_rng);
  critic_ = make_mlp(critic_sizes, Activation::kRelu, Activation::kIdentity, init_rng);
  q_target_ = q_net_;
  critic_target_ = critic_;
  q_opt_ = AdamOptimizer(q_net_, cfg_.adam);
  actor_opt_ = AdamOptimizer(actor_, cfg_.adam);
  critic_opt_ = AdamOptimizer(critic_, cfg_.adam);
  normalizer_ = std::make_shared<FeatureNormalizer>(c);
  broadcast_.reset({q_net_, actor_});
}

std::string TwoLayerLearner::output_size_label() const {
  return std::to_string(num_subbands_) + " + 1";
}

void TwoLayerLearner::begin_episode() {
  pending_.clear();
  broadcast_.reset({q_net_, actor_});
}

void TwoLayerLearner::sync_acting_to_masters() { broadcast_.reset({q_net_, actor_}); }

double TwoLayerLearner::epsilon_top(int slot) const {
  return ExplorationSchedule{cfg_.eps_top, cfg_.eps_top_decay}.at(slot);
}

double TwoLayerLearner::epsilon_bottom(int slot) const {
  return ExplorationSchedule{cfg_.eps_bottom, cfg_.eps_bottom_decay}.at(slot);
}

Allocation TwoLayerLearner::act(const std::vector<AgentState>& states, int slot, bool explore,
                                Rng& rng, std::vector<AgentDecision>& decisions) const {
  const Snapshot& policy = broadcast_.active();
  const int n_links = static_cast<int>(states.size());
  const double eps_top = explore ? epsilon_top(slot) : 0.0;
  const double eps_bottom = explore ? epsilon_bottom(slot) : 0.0;

  std::vector<std::span<const double>> tops;
  for (const auto& s : states) tops.push_back(s.top_state());
  const Eigen::MatrixXd q = forward(policy.q_net, stack_columns(tops));

  decisions.assign(n_links, {});
  std::vector<std::span<const double>> chosen;
  for (int n = 0; n < n_links; ++n) {
    const auto col = q.col(n);
    decisions[n].port = epsilon_greedy(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                       eps_top, rng);
    decisions[n].subband = decisions[n].port;
    chosen.push_back(states[n].subband_state(decisions[n].subband));
  }
  const Eigen::MatrixXd mu = forward(policy.actor, stack_columns(chosen));

  Allocation alloc;
  alloc.subband.resize(n_links);
  alloc.power.resize(n_links);
  for (int n = 0; n < n_links; ++n) {
    double a = std::clamp(mu(0, n), 0.0, 1.0);
    if (uniform01(rng) < eps_bottom) a = uniform01(rng);
    decisions[n].power_action = a;
    alloc.subband[n] = decisions[n].subband;
    alloc.power[n] = p_max_w_ * a;
  }
  return alloc;
}

void TwoLayerLearner::record(int slot, const std::vector<AgentState>& states,
                             const std::vector<AgentDecision>& decisions,
                             std::span<const double> rewards,
                             const std::vector<AgentState>& next_states) {
  Pending p;
  p.usable_from = slot + 2;
  for (std::size_t n = 0; n < states.size(); ++n) {
    const int m = decisions[n].subband;
    const auto len = static_cast<std::size_t>(states[n].per_subband);
    p.subband.push_back({StateRef::whole(states[n].top), m, rewards[n],
                         StateRef::whole(next_states[n].top)});
    p.power.push_back({StateRef::slice(states[n].top, m * len, len), decisions[n].power_action,
                       rewards[n], StateRef::slice(next_states[n].top, m * len, len), m});
  }
  pending_.push_back(std::move(p));
}

TickReport TwoLayerLearner::trainer_tick(int slot, Rng& rng) {
  TickReport report;
  while (!pending_.empty() && pending_.front().usable_from <= slot) {
    for (auto& e : pending_.front().subband) d_subband_.push(std::move(e));
    for (auto& e : pending_.front().power) d_power_.push(std::move(e));
    pending_.pop_front();
  }
  const double lr_scale = LearningRateSchedule{1.0, cfg_.lr_decay, cfg_.lr_decay_period}.at(slot);
  report.loss_q = dqn_train_step(q_net_, q_opt_, q_target_, d_subband_, cfg_.batch_size,
                                 cfg_.warmup, cfg_.gamma, cfg_.lr_q * lr_scale, rng);
  report.loss_critic = ddpg_critic_step(critic_, critic_opt_, critic_target_, actor_, d_power_,
                                        cfg_.batch_size, cfg_.warmup, cfg_.gamma,
                                        cfg_.lr_critic * lr_scale, rng);
  report.actor_value = ddpg_actor_step(actor_, actor_opt_, critic_, d_power_, cfg_.batch_size,
                                       cfg_.warmup, cfg_.lr_actor * lr_scale, rng);
  if (report.loss_q) {
    ++report.gradient_steps;
    q_sync_.tick(q_net_, q_target_);
  }
  if (report.loss_critic) {
    ++report.gradient_steps;
    critic_sync_.tick(critic_, critic_target_);
  }
  if (report.actor_value) ++report.gradient_steps;
  report.captured = broadcast_.capture(slot, [this] { return Snapshot{q_net_, actor_}; });
  report.released = broadcast_.release(slot);
  return report;
}

nlohmann::json TwoLayerLearner::to_json() const {
  return {{"scheme", scheme()},
          {"num_subbands", num_subbands_},
          {"c", c_},
          {"p_max_w", p_max_w_},
          {"config", learner_config_to_json(cfg_)},
          {"q_net", mlp_to_json(q_net_)},
          {"q_target", mlp_to_json(q_target_)},
          {"actor", mlp_to_json(actor_)},
          {"critic", mlp_to_json(critic_)},
          {"critic_target", mlp_to_json(critic_target_)},
          {"q_opt", q_opt_.to_json()},
          {"actor_opt", actor_opt_.to_json()},
          {"critic_opt", critic_opt_.to_json()},
          {"q_sync_count", q_sync_.count()},
          {"critic_sync_count", critic_sync_.count()},
          {"normalizer", normalizer_->to_json()}};
}

std::unique_ptr<TwoLayerLearner> TwoLayerLearner::from_json(const nlohmann::json& j) {
  if (j.at("scheme").get<std::string>() != "proposed") {
    throw std::invalid_argument("checkpoint is not a two-layer learner");
  }
  std::unique_ptr<TwoLayerLearner> out(new TwoLayerLearner());
  out->num_subbands_ = j.at("num_subbands").get<int>();
  out->c_ = j.at("c").get<int>();
  out->p_max_w_ = j.at("p_max_w").get<double>();
  out->cfg_ = learner_config_from_json(j.at("config"));
  out->q_net_ = mlp_from_json(j.at("q_net"));
  out->q_target_ = mlp_from_json(j.at("q_target"));
  out->actor_ = mlp_from_json(j.at("actor"));
  out->critic_ = mlp_from_json(j.at("critic"));
  out->critic_target_ = mlp_from_json(j.at("critic_target"));
  out->q_opt_ = AdamOptimizer::from_json(j.at("q_opt"));
  out->actor_opt_ = AdamOptimizer::from_json(j.at("actor_opt"));
  out->critic_opt_ = AdamOptimizer::from_json(j.at("critic_opt"));
  out->q_sync_ = TargetSync(out->cfg_.target_period);
  out->q_sync_.set_count(j.at("q_sync_count").get<long>());
  out->critic_sync_ = TargetSync(out->cfg_.target_period);
  out->critic_sync_.set_count(j.at("critic_sync_count").get<long>());
  out->d_subband_ = ReplayMemory<ExperienceSubband>(out->cfg_.replay_capacity);
  out->d_power_ = ReplayMemory<ExperiencePower>(out->cfg_.replay_capacity);
  out->broadcast_ = BroadcastSchedule<Snapshot>(out->cfg_.broadcast_period, out->cfg_.broadcast_delay);
  out->broadcast_.reset({out->q_net_, out->actor_});
  out->normalizer_ = std::make_shared<FeatureNormalizer>(FeatureNormalizer::from_json(j.at("normalizer")));
  return out;
}

// ---------------------------------------------------------------------------
// Joint learner.

JointLearner::JointLearner(int num_subbands, int c, LearnerConfig cfg, double p_max_w,
                           Rng& init_rng)
    : num_subbands_(num_subbands),
      c_(c),
      p_max_w_(p_max_w),
      cfg_(std::move(cfg)),
      levels_w_(joint_power_levels(p_max_w, cfg_.power_levels, cfg_.power_span_db)),
      q_sync_(cfg_.target_period),
      memory_(cfg_.replay_capacity),
      broadcast_(cfg_.broadcast_period, cfg_.broadcast_delay) {
  const auto sizes = network_sizes(state_length(c) * num_subbands, cfg_.hidden,
                                   num_subbands * cfg_.power_levels);
  q_net_ = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, init_rng);
  q_target_ = q_net_;
  q_opt_ = AdamOptimizer(q_net_, cfg_.adam);
  normalizer_ = std::make_shared<FeatureNormalizer>(c);
  broadcast_.reset(q_net_);
}

std::string JointLearner::output_size_label() const {
  return std::to_string(num_subbands_ * cfg_.power_levels);
}

void JointLearner::begin_episode() {
  pending_.clear();
  broadcast_.reset(q_net_);
}

void JointLearner::sync_acting_to_masters() { broadcast_.reset(q_net_); }

double JointLearner::epsilon_top(int slot) const {
  return ExplorationSchedule{cfg_.eps_top, cfg_.eps_top_decay}.at(slot);
}

Allocation JointLearner::act(const std::vector<AgentState>& states, int slot, bool explore,
                             Rng& rng, std::vector<AgentDecision>& decisions) const {
  const int n_links = static_cast<int>(states.size());
  const double eps = explore ? epsilon_top(slot) : 0.0;
  std::vector<std::span<const double>> tops;
  for (const auto& s : states) tops.push_back(s.top_state());
  const Eigen::MatrixXd q = forward(broadcast_.active(), stack_columns(tops));

  decisions.assign(n_links, {});
  Allocation alloc;
  alloc.subband.resize(n_links);
  alloc.power.resize(n_links);
  for (int n = 0; n < n_links; ++n) {
    const auto col = q.col(n);
    const int port = epsilon_greedy(
        std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), eps, rng);
    const JointAction a = decode_joint(port, cfg_.power_levels);
    decisions[n].port = port;
    decisions[n].subband = a.subband;
    decisions[n].power_action = levels_w_[a.level] / p_max_w_;
    alloc.subband[n] = a.subband;
    alloc.power[n] = levels_w_[a.level];
  }
  return alloc;
}

void JointLearner::record(int slot, const std::vector<AgentState>& states,
                          const std::vector<AgentDecision>& decisions,
                          std::span<const double> rewards,
                          const std::vector<AgentState>& next_states) {
  Pending p;
  p.usable_from = slot + 2;
  for (std::size_t n = 0; n < states.size(); ++n) {
    p.experiences.push_back({StateRef::whole(states[n].top), decisions[n].port, rewards[n],
                             StateRef::whole(next_states[n].top)});
  }
  pending_.push_back(std::move(p));
}

TickReport JointLearner::trainer_tick(int slot, Rng& rng) {
  TickReport report;
  while (!pending_.empty() && pending_.front().usable_from <= slot) {
    for (auto& e : pending_.front().experiences) memory_.push(std::move(e));
    pending_.pop_front();
  }
  const double lr = LearningRateSchedule{cfg_.lr_q, cfg_.lr_decay, cfg_.lr_decay_period}.at(slot);
  report.loss_q = dqn_train_step(q_net_, q_opt_, q_target_, memory_, cfg_.batch_size, cfg_.warmup,
                                 cfg_.gamma, lr, rng);
  if (report.loss_q) {
    ++report.gradient_steps;
    q_sync_.tick(q_net_, q_target_);
  }
  report.captured = broadcast_.capture(slot, [this] { return q_net_; });
  report.released = broadcast_.release(slot);
  return report;
}

nlohmann::json JointLearner::to_json() const {
  return {{"scheme", scheme()},
          {"num_subbands", num_subbands_},
          {"c", c_},
          {"p_max_w", p_max_w_},
          {"config", learner_config_to_json(cfg_)},
          {"q_net", mlp_to_json(q_net_)},
          {"q_target", mlp_to_json(q_target_)},
          {"q_opt", q_opt_.to_json()},
          {"q_sync_count", q_sync_.count()},
          {"normalizer", normalizer_->to_json()}};
}

std::unique_ptr<JointLearner> JointLearner::from_json(const nlohmann::json& j) {
  if (j.at("scheme").get<std::string>() != "joint") {
    throw std::invalid_argument("checkpoint is not a joint learner");
  }
  std::unique_ptr<JointLearner> out(new JointLearner());
  out->num_subbands_ = j.at("num_subbands").get<int>();
  out->c_ = j.at("c").get<int>();
  out->p_max_w_ = j.at("p_max_w").get<double>();
  out->cfg_ = learner_config_from_json(j.at("config"));
  out->levels_w_ = joint_power_levels(out->p_max_w_, out->cfg_.power_levels, out->cfg_.power_span_db);
  out->q_net_ = mlp_from_json(j.at("q_net"));
  out->q_target_ = mlp_from_json(j.at("q_target"));
  out->q_opt_ = AdamOptimizer::from_json(j.at("q_opt"));
  out->q_sync_ = TargetSync(out->cfg_.target_period);
  out->q_sync_.set_count(j.at("q_sync_count").get<long>());
  out->memory_ = ReplayMemory<ExperienceSubband>(out->cfg_.replay_capacity);
  out->broadcast_ = BroadcastSchedule<MlpParams>(out->cfg_.broadcast_period, out->cfg_.broadcast_delay);
  out->broadcast_.reset(out->q_net_);
  out->normalizer_ = std::make_shared<FeatureNormalizer>(FeatureNormalizer::from_json(j.at("normalizer")));
  return out;
}

std::unique_ptr<Learner> learner_from_json(const nlohmann::json& j) {
  const auto scheme = j.at("scheme").get<std::string>();
  if (scheme == "proposed") return TwoLayerLearner::from_json(j);
  if (scheme == "joint") return JointLearner::from_json(j);
  throw std::invalid_argument("unknown learner scheme in checkpoint: " + scheme);
}

}  // namespace jointrl
