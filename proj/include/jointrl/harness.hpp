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

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jointrl/agents.hpp"
#include "jointrl/baselines.hpp"
#include "jointrl/channel.hpp"
#include "jointrl/env.hpp"

namespace jointrl {

enum class Scheme { kProposed, kJoint, kIdealFp, kDelayedFp, kRandom };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);
bool is_learner(Scheme s);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

inline constexpr int kConfigVersion = 1;

struct ExperimentConfig {
  int num_cells = 5;
  int num_links = 20;
  int num_subbands = 4;
  double cell_radius_m = 400.0;
  double min_distance_m = 10.0;
  double shadow_std_db = 10.0;
  double f_d_hz = 10.0;
  double slot_T_s = 0.02;
  double p_max_dbm = 38.0;
  double noise_dbm = -114.0;
  double sinr_cap_db = 30.0;
  int c = 5;
  int episodes = 4;
  int slots_per_episode = 5000;
  std::vector<std::uint64_t> seeds{1};
  Scheme scheme = Scheme::kProposed;
  LearnerConfig learner;
  int test_deployments = 5;
  int test_slots = 2000;
  int test_warmup = 100;
  int ma_window = 250;
  int fp_max_iter = 500;
  double fp_tol = 1e-3;
  bool metrics_dump = false;

  // Linear quantities, derived once by finalize_config.
  double p_max_w = 0.0;
  double noise_w = 0.0;
  double rho = 1.0;
};

/// Validates and derives the linear-scale fields. Throws std::invalid_argument.
void finalize_config(ExperimentConfig& cfg);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

EnvConfig env_config(const ExperimentConfig& cfg, bool build_states = true);

/// Deployment, large-scale fading and fading seeds for one realization.
struct Realization {
  Deployment deployment;
  LargeScaleFading beta;
  std::uint64_t fading_seed = 0;
  std::uint64_t innovation_seed = 0;
};

/// `base` is a seed already specific to the episode or test deployment.
Realization make_realization(const ExperimentConfig& cfg, std::uint64_t base);
std::uint64_t training_episode_seed(std::uint64_t master, int episode);
std::uint64_t test_deployment_seed(std::uint64_t master, int index);

struct TrainingSeries {
  std::vector<double> sum_rate;
  std::vector<double> mean_reward;
  std::vector<double> loss_q;       // NaN where no step ran
  std::vector<double> loss_critic;  // NaN where no step ran
  std::vector<double> eps_top;
  std::vector<double> eps_bottom;
};

struct TestRow {
  int num_cells = 0;
  int num_links = 0;
  int num_subbands = 0;
  std::string scheme;
  double sum_rate_per_link = 0.0;
  std::string q_output_size;
  std::optional<double> fp_mean_iterations;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::string scheme;
  TrainingSeries training;
  std::vector<TestRow> test_rows;
  long environment_steps = 0;
  long allocations_checked = 0;
  double wall_clock_s = 0.0;
};

nlohmann::json record_to_json(const RunRecord& rec);
RunRecord record_from_json(const nlohmann::json& j);

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg, std::uint64_t seed);

struct TrainingResult {
  RunRecord record;
  std::unique_ptr<Learner> learner;
};

/// Episodes x slots steps with a fresh deployment and reset schedules per
/// episode. Requires a learner scheme. Pass `resume` to continue training an
/// existing learner.
TrainingResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                            std::unique_ptr<Learner> resume = nullptr);

/// Per-slot rows for the optional metrics dump.
struct DumpRow {
  long slot;
  int link;
  int subband;  // 1-based
  double power_w;
  double sinr;
  double rate;
  double reward;
};

struct TestOptions {
  std::vector<DumpRow>* dump = nullptr;
};

/// Greedy evaluation of a trained learner on fresh test deployments. Acting
/// parameters are switched to the learner's masters first.
RunRecord run_test(const ExperimentConfig& cfg, std::uint64_t seed, Learner& learner,
                   const TestOptions& options = {});

/// Evaluates non-learning schemes on the same test deployments and channel
/// realizations. `dump` collects rows for the first scheme listed.
RunRecord run_benchmark(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::vector<Scheme>& schemes, const TestOptions& options = {});

// Output files.
void write_training_curve(const std::filesystem::path& path, const TrainingSeries& series,
                          int window);
void emit_table(const std::filesystem::path& path, const std::vector<TestRow>& rows);
void write_metrics_dump(const std::filesystem::path& path, const std::vector<DumpRow>& rows);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
std::string table_csv(const std::vector<TestRow>& rows);

/// Trailing moving average; entry t averages slots max(0, t - window + 1)..t.
std::vector<double> moving_average(const std::vector<double>& x, int window);

}  // namespace jointrl
