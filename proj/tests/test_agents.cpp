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
#include <numeric>

#include "jointrl/agents.hpp"

namespace jointrl {
namespace {

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Single-layer identity network whose outputs are its bias, so Q values can
// be set by hand.
MlpParams constant_net(int in, std::vector<double> outputs) {
  Rng rng(1);
  const std::vector<int> sizes{in, static_cast<int>(outputs.size())};
  MlpParams net = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  net.layers[0].weight.setZero();
  for (std::size_t i = 0; i < outputs.size(); ++i) net.layers[0].bias(i) = outputs[i];
  return net;
}

std::shared_ptr<const std::vector<double>> random_state(int n, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  auto v = std::make_shared<std::vector<double>>(n);
  for (auto& x : *v) x = d(rng);
  return v;
}

TEST(Selection, GreedyAndTies) {
  const MlpParams q = constant_net(2, {0.1, 0.9, 0.3});
  Rng rng(3);
  const std::vector<double> s{0.0, 0.0};
  EXPECT_EQ(select_subband(q, s, 0.0, rng), 1);
  EXPECT_EQ(argmax_lowest(std::vector<double>{2.0, 5.0, 5.0, 1.0}), 1);
  const MlpParams tied = constant_net(2, {0.4, 0.4, 0.4});
  EXPECT_EQ(select_subband(tied, s, 0.0, rng), 0);
}

TEST(Selection, FullExplorationIsUniform) {
  const MlpParams q = constant_net(2, {0.0, 1.0, 0.0, 0.0});
  Rng rng(4);
  const std::vector<double> s{0.0, 0.0};
  std::vector<int> counts(4, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[select_subband(q, s, 1.0, rng)];
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(draws), 0.25, 0.01);
}

TEST(Selection, PowerActionBoundsAndMoments) {
  Rng rng(5);
  const std::vector<int> sizes{6, 8, 1};
  const MlpParams actor = make_mlp(sizes, Activation::kRelu, Activation::kSigmoid, rng);
  const std::vector<double> s{0.3, -1.0, 2.0, 0.0, 0.5, 1.5};
  EXPECT_DOUBLE_EQ(select_power(actor, s, 0.0, rng), forward(actor, s)(0));
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double a = select_power(actor, s, 1.0, rng);
    ASSERT_GE(a, 0.0);
    ASSERT_LE(a, 1.0);
    sum += a;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
  for (int i = 0; i < 200; ++i) {
    const auto st = random_state(6, rng);
    const double a = select_power(actor, *st, 0.0, rng);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Joint, EncodingAndLevels) {
  // Port 37 with ten levels: fourth subband (index 3), level index 7.
  const JointAction a = decode_joint(37, 10);
  EXPECT_EQ(a.subband, 3);
  EXPECT_EQ(a.level, 7);
  EXPECT_EQ(encode_joint(a, 10), 37);
  for (int i = 0; i < 40; ++i) EXPECT_EQ(encode_joint(decode_joint(i, 10), 10), i);

  const double pmax = std::pow(10.0, 0.8);
  const auto levels = joint_power_levels(pmax, 10, 32.0);
  ASSERT_EQ(levels.size(), 10u);
  EXPECT_EQ(levels[0], 0.0);
  EXPECT_NEAR(levels[9], pmax, 1e-12);
  EXPECT_NEAR(10.0 * std::log10(levels[1] / pmax), -32.0, 1e-9);
  for (int k = 2; k < 10; ++k) {
    EXPECT_NEAR(10.0 * std::log10(levels[k] / levels[k - 1]), 4.0, 1e-9);
  }
}

TEST(Joint, OutputWidthAndGreedyPort) {
  Rng rng(6);
  LearnerConfig cfg;
  cfg.hidden = {8};
  JointLearner learner(4, 5, cfg, 6.3, rng);
  EXPECT_EQ(learner.q_net().output_size(), 40);
  EXPECT_EQ(learner.output_size_label(), "40");
  std::vector<double> q(40, 0.0);
  q[37] = 1.0;
  const MlpParams net = constant_net(3, q);
  const std::vector<double> s{0.0, 0.0, 0.0};
  const JointAction a = joint_dqn_action(net, s, 0.0, 10, rng);
  EXPECT_EQ(a.subband, 3);
  EXPECT_EQ(a.level, 7);
}

TEST(Dqn, TargetFormula) {
  const std::vector<double> next{2.0, 4.0};
  EXPECT_DOUBLE_EQ(dqn_target(1.0, next, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(dqn_target(1.0, next, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(dqn_target(-2.0, std::vector<double>{3.0}, 0.5), -0.5);
}

struct DqnFixture {
  std::vector<ExperienceSubband> store;
  std::vector<const ExperienceSubband*> ptrs;

  DqnFixture(int n, int in, int actions, Rng& rng) {
    std::uniform_int_distribution<int> pick(0, actions - 1);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      store.push_back({StateRef::whole(random_state(in, rng)), pick(rng), d(rng),
                       StateRef::whole(random_state(in, rng))});
    }
    for (const auto& e : store) ptrs.push_back(&e);
  }
};

TEST(Dqn, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  const std::vector<int> sizes{6, 10, 7, 3};
  MlpParams q = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  const MlpParams target = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  DqnFixture fx(2, 6, 3, rng);
  const DqnBatch batch = make_dqn_batch(fx.ptrs);
  const Eigen::VectorXd y = dqn_targets(target, batch, 0.5);
  double loss = 0.0;
  const GradientBundle g = dqn_gradient(q, batch, y, &loss);
  EXPECT_NEAR(loss, dqn_loss(q, batch, y), 1e-12);
  const double h = 1e-5;
  for (std::size_t k = 0; k < q.layers.size(); ++k) {
    auto& w = q.layers[k].weight;
    for (int idx = 0; idx < w.size(); idx += 3) {
      const double saved = w.data()[idx];
      w.data()[idx] = saved + h;
      const double up = dqn_loss(q, batch, y);
      w.data()[idx] = saved - h;
      const double down = dqn_loss(q, batch, y);
      w.data()[idx] = saved;
      EXPECT_LT(relative_error(g.weight[k].data()[idx], (up - down) / (2 * h)), 1e-5);
    }
  }
}

TEST(Dqn, PerfectPredictionsGiveZeroGradient) {
  Rng rng(8);
  const std::vector<int> sizes{4, 6, 2};
  MlpParams q = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  DqnFixture fx(5, 4, 2, rng);
  const DqnBatch batch = make_dqn_batch(fx.ptrs);
  const Eigen::MatrixXd out = forward(q, batch.s);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) y(i) = out(batch.action[i], i);
  const GradientBundle g = dqn_gradient(q, batch, y);
  EXPECT_EQ(g.squared_norm(), 0.0);
  const MlpParams before = q;
  AdamOptimizer opt(q);
  opt.apply(q, g, 1e-3);
  EXPECT_EQ(q.layers[0].weight, before.layers[0].weight);
}

TEST(Dqn, FixedBatchLossHalves) {
  Rng rng(9);
  const std::vector<int> sizes{8, 32, 16, 4};
  MlpParams q = make_mlp(sizes, Activation::kRelu, Activation::kIdentity, rng);
  DqnFixture fx(32, 8, 4, rng);
  const DqnBatch batch = make_dqn_batch(fx.ptrs);
  Eigen::VectorXd y = batch.reward;
  AdamOptimizer opt(q);
  const double start = dqn_loss(q, batch, y);
  double last = start;
  for (int i = 0; i < 200; ++i) {
    double loss = 0.0;
    auto g = dqn_gradient(q, batch, y, &loss);
    opt.apply(q, g, 1e-3);
    last = dqn_loss(q, batch, y);
  }
  EXPECT_LT(last, 0.5 * start);
}

struct PowerFixture {
  std::vector<ExperiencePower> store;
  std::vector<const ExperiencePower*> ptrs;

  PowerFixture(int n, int in, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      store.push_back({StateRef::whole(random_state(in, rng)), u(rng), d(rng),
                       StateRef::whole(random_state(in, rng)), 0});
    }
    for (const auto& e : store) ptrs.push_back(&e);
  }
};

TEST(Critic, ZeroDiscountIsRegressionOnReward) {
  Rng rng(10);
  const std::vector<int> csizes{6, 8, 1};
  const std::vector<int> asizes{5, 8, 1};
  const MlpParams critic = make_mlp(csizes, Activation::kRelu, Activation::kIdentity, rng);
  const MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  PowerFixture fx(4, 5, rng);
  const PowerBatch batch = make_power_batch(fx.ptrs);
  const Eigen::VectorXd y = critic_targets(critic, actor, batch, 0.0);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(y(i), batch.reward(i));
  const Eigen::MatrixXd q = forward(critic, critic_input(batch.s, batch.action));
  EXPECT_NEAR(critic_loss(critic, batch, y), (q.row(0).transpose() - y).squaredNorm() / 4.0, 1e-12);
}

TEST(Critic, TargetUsesActorAtNextState) {
  Rng rng(11);
  const std::vector<int> csizes{4, 8, 1};
  const std::vector<int> asizes{3, 8, 1};
  const MlpParams critic = make_mlp(csizes, Activation::kRelu, Activation::kIdentity, rng);
  const MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  PowerFixture fx(3, 3, rng);
  const PowerBatch batch = make_power_batch(fx.ptrs);
  const Eigen::VectorXd y = critic_targets(critic, actor, batch, 0.5);
  for (int i = 0; i < 3; ++i) {
    const auto& sn = *fx.store[i].s_next.data;
    const double a = forward(actor, sn)(0);
    std::vector<double> in(sn.begin(), sn.end());
    in.push_back(a);
    EXPECT_NEAR(y(i), fx.store[i].reward + 0.5 * forward(critic, in)(0), 1e-12);
  }
}

TEST(Critic, GradientMatchesFiniteDifferences) {
  Rng rng(12);
  const std::vector<int> csizes{6, 9, 7, 1};
  const std::vector<int> asizes{5, 8, 1};
  MlpParams critic = make_mlp(csizes, Activation::kRelu, Activation::kIdentity, rng);
  const MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  PowerFixture fx(3, 5, rng);
  const PowerBatch batch = make_power_batch(fx.ptrs);
  const Eigen::VectorXd y = critic_targets(critic, actor, batch, 0.5);
  const GradientBundle g = critic_gradient(critic, batch, y);
  const double h = 1e-5;
  for (std::size_t k = 0; k < critic.layers.size(); ++k) {
    auto& w = critic.layers[k].weight;
    for (int idx = 0; idx < w.size(); idx += 2) {
      const double saved = w.data()[idx];
      w.data()[idx] = saved + h;
      const double up = critic_loss(critic, batch, y);
      w.data()[idx] = saved - h;
      const double down = critic_loss(critic, batch, y);
      w.data()[idx] = saved;
      EXPECT_LT(relative_error(g.weight[k].data()[idx], (up - down) / (2 * h)), 1e-5);
    }
  }
}

TEST(Critic, FixedBatchLossHalves) {
  Rng rng(13);
  const std::vector<int> csizes{9, 32, 16, 1};
  const std::vector<int> asizes{8, 16, 1};
  MlpParams critic = make_mlp(csizes, Activation::kRelu, Activation::kIdentity, rng);
  const MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  PowerFixture fx(32, 8, rng);
  const PowerBatch batch = make_power_batch(fx.ptrs);
  const Eigen::VectorXd y = critic_targets(critic, actor, batch, 0.5);
  AdamOptimizer opt(critic);
  const double start = critic_loss(critic, batch, y);
  for (int i = 0; i < 200; ++i) opt.apply(critic, critic_gradient(critic, batch, y), 1e-3);
  EXPECT_LT(critic_loss(critic, batch, y), 0.5 * start);
}

TEST(Actor, GradientThroughCriticMatchesFiniteDifferences) {
  Rng rng(14);
  const std::vector<int> csizes{6, 9, 7, 1};
  const std::vector<int> asizes{5, 8, 6, 1};
  const MlpParams critic = make_mlp(csizes, Activation::kRelu, Activation::kIdentity, rng);
  MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  Eigen::MatrixXd s(5, 4);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < s.size(); ++i) s.data()[i] = d(rng);
  const GradientBundle g = actor_gradient(actor, s, critic_action_gradient(critic));
  const double h = 1e-5;
  for (std::size_t k = 0; k < actor.layers.size(); ++k) {
    auto& w = actor.layers[k].weight;
    for (int idx = 0; idx < w.size(); idx += 2) {
      const double saved = w.data()[idx];
      w.data()[idx] = saved + h;
      const double up = -actor_objective(actor, critic, s);
      w.data()[idx] = saved - h;
      const double down = -actor_objective(actor, critic, s);
      w.data()[idx] = saved;
      EXPECT_LT(relative_error(g.weight[k].data()[idx], (up - down) / (2 * h)), 1e-5);
    }
  }
}

TEST(Actor, CriticBlindToActionGivesZeroGradient) {
  Rng rng(15);
  const std::vector<int> csizes{4, 6, 1};
  const std::vector<int> asizes{3, 6, 1};
  MlpParams critic = make_mlp(csizes, Activation::kRelu, Activation::kIdentity, rng);
  critic.layers[0].weight.col(3).setZero();  // action column
  const MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  const Eigen::MatrixXd s = Eigen::MatrixXd::Random(3, 5);
  const GradientBundle g = actor_gradient(actor, s, critic_action_gradient(critic));
  EXPECT_EQ(g.squared_norm(), 0.0);
}

TEST(Actor, QuadraticCriticDrivesActionToOptimum) {
  Rng rng(16);
  const std::vector<int> asizes{3, 16, 1};
  MlpParams actor = make_mlp(asizes, Activation::kRelu, Activation::kSigmoid, rng);
  Eigen::MatrixXd s(3, 1);
  s << 0.5, -0.2, 1.0;
  // q(s, a) = -(a - 0.7)^2
  const ActionGradient dq_da = [](const Eigen::MatrixXd&, const Eigen::RowVectorXd& a) {
    return Eigen::RowVectorXd(-2.0 * (a.array() - 0.7));
  };
  AdamOptimizer opt(actor);
  for (int i = 0; i < 3000; ++i) opt.apply(actor, actor_gradient(actor, s, dq_da), 1e-3);
  EXPECT_NEAR(forward(actor, s)(0, 0), 0.7, 0.01);
}

TEST(Replay, FifoEvictionAndSampling) {
  ReplayMemory<int> mem(3);
  for (int i = 0; i < 5; ++i) mem.push(i);
  EXPECT_EQ(mem.size(), 3u);
  EXPECT_EQ(mem[0], 2);
  EXPECT_EQ(mem[2], 4);
  Rng rng(1);
  for (const int* p : mem.sample(50, rng)) EXPECT_GE(*p, 2);
  EXPECT_THROW(ReplayMemory<int>(0), std::invalid_argument);
  ReplayMemory<int> empty(2);
  EXPECT_THROW(empty.sample(1, rng), std::logic_error);
}

TEST(Broadcast, ScheduleTrace) {
  BroadcastSchedule<int> b(50, 2);
  b.reset(-1);
  std::vector<int> captures, releases;
  for (int t = 0; t <= 160; ++t) {
    if (b.capture(t, [t] { return t; })) captures.push_back(t);
    if (b.release(t)) releases.push_back(t);
    if (t == 51) EXPECT_EQ(b.active(), -1);
    if (t == 52) EXPECT_EQ(b.active(), 50);
  }
  EXPECT_EQ(captures, (std::vector<int>{50, 100, 150}));
  EXPECT_EQ(releases, (std::vector<int>{52, 102, 152}));
  EXPECT_EQ(b.active(), 150);
}

TEST(Schedules, NonIncreasingAndValues) {
  const ExplorationSchedule top{0.25, 0.9995};
  const ExplorationSchedule bottom{0.6, 0.999};
  EXPECT_DOUBLE_EQ(top.at(0), 0.25);
  EXPECT_NEAR(bottom.at(1000), 0.6 * std::pow(0.999, 1000), 1e-12);
  for (int t = 1; t < 6000; ++t) {
    ASSERT_LE(top.at(t), top.at(t - 1));
    ASSERT_LE(bottom.at(t), bottom.at(t - 1));
  }
  const LearningRateSchedule lr{1e-4, 0.995, 100};
  EXPECT_DOUBLE_EQ(lr.at(99), 1e-4);
  EXPECT_DOUBLE_EQ(lr.at(100), 1e-4 * 0.995);
  EXPECT_NEAR(lr.at(4999), 1e-4 * std::pow(0.995, 49), 1e-18);
}

// Small learner over synthetic states, for trainer plumbing checks.
struct MiniWorld {
  int agents = 3;
  int m = 2;
  int c = 1;
  int len = state_length(1);
  Rng rng{21};

  std::vector<AgentState> states() {
    std::vector<AgentState> out;
    for (int n = 0; n < agents; ++n) {
      AgentState s;
      s.per_subband = len;
      s.num_subbands = m;
      s.top = random_state(len * m, rng);
      s.rank = {1, 2};
      out.push_back(s);
    }
    return out;
  }
};

LearnerConfig small_config() {
  LearnerConfig cfg;
  cfg.hidden = {16, 8};
  cfg.batch_size = 4;
  cfg.warmup = 9;
  cfg.replay_capacity = 100;
  return cfg;
}

TEST(Trainer, ExperienceDelayAndWarmup) {
  MiniWorld w;
  Rng init(2), act_rng(3), replay_rng(4);
  TwoLayerLearner learner(w.m, w.c, small_config(), 6.3, init);
  learner.begin_episode();
  auto states = w.states();
  std::vector<AgentDecision> decisions;
  for (int t = 1; t <= 6; ++t) {
    const auto tick = learner.trainer_tick(t, replay_rng);
    // Slot t sees experiences recorded at slots up to t - 2.
    EXPECT_EQ(learner.subband_memory().size(), static_cast<std::size_t>(std::max(0, t - 2) * 3));
    if (learner.subband_memory().size() < 9) EXPECT_EQ(tick.gradient_steps, 0);
    learner.act(states, t, true, act_rng, decisions);
    auto next = w.states();
    learner.record(t, states, decisions, std::vector<double>(3, 1.0), next);
    states = next;
  }
  const auto tick = learner.trainer_tick(7, replay_rng);
  EXPECT_EQ(learner.subband_memory().size(), 15u);
  EXPECT_EQ(tick.gradient_steps, 3);
  EXPECT_EQ(learner.trainer_steps(), 3);  // slots 5, 6 and 7
}

TEST(Trainer, PowerExperiencesCarryTheChosenSubband) {
  MiniWorld w;
  Rng init(2), act_rng(3);
  TwoLayerLearner learner(w.m, w.c, small_config(), 6.3, init);
  learner.begin_episode();
  auto states = w.states();
  auto next = w.states();
  // Tag every value with its subband so slices can be traced.
  for (auto* group : {&states, &next}) {
    for (auto& s : *group) {
      auto v = std::make_shared<std::vector<double>>(*s.top);
      for (int m = 0; m < w.m; ++m)
        for (int i = 0; i < w.len; ++i) (*v)[m * w.len + i] = 100.0 * (m + 1) + i;
      s.top = v;
    }
  }
  std::vector<AgentDecision> decisions;
  learner.act(states, 1, true, act_rng, decisions);
  learner.record(1, states, decisions, std::vector<double>(3, 0.0), next);
  Rng replay(1);
  learner.trainer_tick(3, replay);
  ASSERT_EQ(learner.power_memory().size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& e = learner.power_memory()[k];
    EXPECT_EQ(e.subband, decisions[k].subband);
    EXPECT_EQ(e.s.view().front(), 100.0 * (e.subband + 1));
    EXPECT_EQ(e.s_next.view().front(), 100.0 * (e.subband + 1));
    EXPECT_EQ(e.s.view().size(), static_cast<std::size_t>(w.len));
    EXPECT_EQ(learner.subband_memory()[k].s.view().size(), static_cast<std::size_t>(w.len * w.m));
  }
}

TEST(Trainer, AllAgentsShareOneSnapshotAndGreedyIsDeterministic) {
  MiniWorld w;
  Rng init(2);
  TwoLayerLearner learner(w.m, w.c, small_config(), 6.3, init);
  learner.begin_episode();
  auto states = w.states();
  states[2].top = states[0].top;  // identical observation
  Rng r1(5), r2(6);
  std::vector<AgentDecision> d1, d2;
  const Allocation a1 = learner.act(states, 1, false, r1, d1);
  const Allocation a2 = learner.act(states, 1, false, r2, d2);
  EXPECT_EQ(a1.subband, a2.subband);
  EXPECT_EQ(a1.power, a2.power);
  EXPECT_EQ(a1.subband[0], a1.subband[2]);
  EXPECT_EQ(a1.power[0], a1.power[2]);
  for (double p : a1.power) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 6.3);
  }
}

TEST(Trainer, BroadcastGovernsActingParameters) {
  MiniWorld w;
  Rng init(2), act_rng(3), replay_rng(4);
  LearnerConfig cfg = small_config();
  cfg.broadcast_period = 5;
  cfg.broadcast_delay = 2;
  TwoLayerLearner learner(w.m, w.c, cfg, 6.3, init);
  learner.begin_episode();
  auto states = w.states();
  std::vector<AgentDecision> decisions;
  std::vector<int> releases;
  for (int t = 1; t <= 16; ++t) {
    const auto tick = learner.trainer_tick(t, replay_rng);
    if (tick.released) releases.push_back(t);
    learner.act(states, t, true, act_rng, decisions);
    auto next = w.states();
    learner.record(t, states, decisions, std::vector<double>(3, 0.5), next);
    states = next;
  }
  EXPECT_EQ(releases, (std::vector<int>{7, 12}));
  // Masters moved after slot 10, acting snapshot is the one from slot 10.
  EXPECT_NE(learner.acting().q_net.layers[0].weight, learner.q_net().layers[0].weight);
  learner.sync_acting_to_masters();
  EXPECT_EQ(learner.acting().q_net.layers[0].weight, learner.q_net().layers[0].weight);
}

TEST(Trainer, TargetsMoveOnlyOnSchedule) {
  MiniWorld w;
  Rng init(2), act_rng(3), replay_rng(4);
  LearnerConfig cfg = small_config();
  cfg.target_period = 3;
  TwoLayerLearner learner(w.m, w.c, cfg, 6.3, init);
  learner.begin_episode();
  auto states = w.states();
  std::vector<AgentDecision> decisions;
  auto target = learner.q_target().layers[0].weight;
  for (int t = 1; t <= 14; ++t) {
    learner.trainer_tick(t, replay_rng);
    const bool synced = learner.trainer_steps() > 0 && learner.trainer_steps() % 3 == 0;
    const auto now = learner.q_target().layers[0].weight;
    if (now != target) {
      EXPECT_TRUE(synced) << "slot " << t;
      EXPECT_EQ(now, learner.q_net().layers[0].weight);
      target = now;
    }
    learner.act(states, t, true, act_rng, decisions);
    auto next = w.states();
    learner.record(t, states, decisions, std::vector<double>(3, 0.5), next);
    states = next;
  }
  EXPECT_GT(learner.trainer_steps(), 3);
}

TEST(Learners, CheckpointRoundTrip) {
  MiniWorld w;
  Rng init(2);
  TwoLayerLearner two(w.m, w.c, small_config(), 6.3, init);
  JointLearner joint(w.m, w.c, small_config(), 6.3, init);
  EXPECT_EQ(two.output_size_label(), "2 + 1");
  EXPECT_EQ(joint.output_size_label(), "20");
  const auto states = w.states();
  for (const Learner* l : std::initializer_list<const Learner*>{&two, &joint}) {
    auto back = learner_from_json(nlohmann::json::parse(l->to_json().dump()));
    back->sync_acting_to_masters();
    EXPECT_EQ(back->scheme(), l->scheme());
    Rng r1(1), r2(1);
    std::vector<AgentDecision> d1, d2;
    const auto a = l->act(states, 1, false, r1, d1);
    const auto b = back->act(states, 1, false, r2, d2);
    EXPECT_EQ(a.subband, b.subband);
    EXPECT_EQ(a.power, b.power);
  }
}

TEST(Learners, JointPowersAreQuantized) {
  MiniWorld w;
  Rng init(2), act_rng(3);
  JointLearner joint(w.m, w.c, small_config(), 6.3, init);
  joint.begin_episode();
  std::vector<AgentDecision> decisions;
  for (int t = 1; t < 50; ++t) {
    const auto a = joint.act(w.states(), t, true, act_rng, decisions);
    for (int n = 0; n < w.agents; ++n) {
      const auto& levels = joint.power_levels();
      EXPECT_NE(std::find(levels.begin(), levels.end(), a.power[n]), levels.end());
      EXPECT_EQ(decode_joint(decisions[n].port, 10).subband, a.subband[n]);
    }
  }
}

}  // namespace
}  // namespace jointrl
