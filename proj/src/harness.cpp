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

#include "jointrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace jointrl {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <typename T>
void read_opt(const json& j, const char* key, T& field) {
  if (j.contains(key)) j.at(key).get_to(field);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

FpOptions fp_options(const ExperimentConfig& cfg) {
  FpOptions opt;
  opt.noise_w = cfg.noise_w;
  opt.p_max_w = cfg.p_max_w;
  opt.sinr_cap_db = cfg.sinr_cap_db;
  opt.max_iter = cfg.fp_max_iter;
  opt.tol = cfg.fp_tol;
  return opt;
}

TestRow base_row(const ExperimentConfig& cfg, const std::string& scheme) {
  TestRow row;
  row.num_cells = cfg.num_cells;
  row.num_links = cfg.num_links;
  row.num_subbands = cfg.num_subbands;
  row.scheme = scheme;
  return row;
}

void check_allocation(const Allocation& alloc, const ExperimentConfig& cfg, long& counter) {
  validate_allocation(alloc, cfg.num_subbands, cfg.p_max_w);
  ++counter;
}

void append_dump(std::vector<DumpRow>& out, long slot, const GainTensor& g, const Allocation& alloc,
                 const SlotMetrics& metrics, std::span<const double> rewards) {
  const int m_count = g.num_subbands;
  for (int n = 0; n < g.num_links; ++n) {
    const int m = alloc.subband[n];
    out.push_back(DumpRow{slot, n, m + 1, alloc.power[n], metrics.sinr[nm(n, m, m_count)],
                          metrics.rate[nm(n, m, m_count)], rewards[n]});
  }
}

std::vector<double> rewards_for(const GainTensor& g, const Allocation& alloc,
                                 const ExperimentConfig& cfg) {
  const auto sets = build_neighbor_sets(g, alloc, cfg.c, cfg.noise_w);
  std::vector<double> r(g.num_links);
  for (int n = 0; n < g.num_links; ++n) r[n] = reward(n, g, alloc, sets, cfg.noise_w, cfg.sinr_cap_db);
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kJoint: return "joint";
    case Scheme::kIdealFp: return "ideal_fp";
    case Scheme::kDelayedFp: return "delayed_fp";
    case Scheme::kRandom: return "random";
  }
  throw std::logic_error("unknown scheme");
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::kProposed, Scheme::kJoint, Scheme::kIdealFp, Scheme::kDelayedFp,
                   Scheme::kRandom}) {
    if (scheme_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme '" + name +
                              "' (expected proposed, joint, ideal_fp, delayed_fp or random)");
}

bool is_learner(Scheme s) { return s == Scheme::kProposed || s == Scheme::kJoint; }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

void finalize_config(ExperimentConfig& cfg) {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("config: " + msg);
  };
  require(cfg.num_cells >= 1, "K must be positive");
  require(cfg.num_links >= cfg.num_cells && cfg.num_links % cfg.num_cells == 0,
          "N must be a positive multiple of K");
  require(cfg.num_subbands >= 1, "M must be positive");
  require(cfg.cell_radius_m > 0.0, "cell_radius_m must be positive");
  require(cfg.min_distance_m > 0.0, "min_distance_m must be positive");
  require(cfg.shadow_std_db >= 0.0, "shadow_std_db must be non-negative");
  require(cfg.f_d_hz >= 0.0 && cfg.slot_T_s > 0.0, "invalid Doppler or slot length");
  require(cfg.c >= 1, "c must be positive");
  require(cfg.episodes >= 1 && cfg.slots_per_episode >= 2, "need episodes >= 1 and slots >= 2");
  require(!cfg.seeds.empty(), "seeds must not be empty");
  require(cfg.test_deployments >= 1 && cfg.test_slots >= 1 && cfg.test_warmup >= 1,
          "invalid test schedule");
  require(cfg.ma_window >= 1, "ma_window must be positive");
  require(cfg.fp_max_iter >= 1 && cfg.fp_tol > 0.0, "invalid FP settings");
  require(cfg.learner.batch_size >= 1 && cfg.learner.replay_capacity >= cfg.learner.batch_size,
          "replay capacity below batch size");
  cfg.p_max_w = dbm_to_watts(cfg.p_max_dbm);
  cfg.noise_w = dbm_to_watts(cfg.noise_dbm);
  cfg.rho = jakes_rho(cfg.f_d_hz, cfg.slot_T_s);
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  const int version = j.value("version", kConfigVersion);
  if (version != kConfigVersion) {
    throw std::invalid_argument("config: unsupported version " + std::to_string(version));
  }
  ExperimentConfig cfg;
  read_opt(j, "K", cfg.num_cells);
  read_opt(j, "N", cfg.num_links);
  read_opt(j, "M", cfg.num_subbands);
  read_opt(j, "cell_radius_m", cfg.cell_radius_m);
  read_opt(j, "min_distance_m", cfg.min_distance_m);
  read_opt(j, "shadow_std_db", cfg.shadow_std_db);
  read_opt(j, "f_d_hz", cfg.f_d_hz);
  read_opt(j, "slot_T_s", cfg.slot_T_s);
  read_opt(j, "P_max_dbm", cfg.p_max_dbm);
  read_opt(j, "noise_dbm", cfg.noise_dbm);
  read_opt(j, "sinr_cap_db", cfg.sinr_cap_db);
  read_opt(j, "c", cfg.c);
  read_opt(j, "episodes", cfg.episodes);
  read_opt(j, "slots_per_episode", cfg.slots_per_episode);
  read_opt(j, "seeds", cfg.seeds);
  if (j.contains("scheme")) cfg.scheme = parse_scheme(j.at("scheme").get<std::string>());
  if (j.contains("learner")) cfg.learner = learner_config_from_json(j.at("learner"));
  read_opt(j, "test_deployments", cfg.test_deployments);
  read_opt(j, "test_slots", cfg.test_slots);
  read_opt(j, "test_warmup", cfg.test_warmup);
  read_opt(j, "ma_window", cfg.ma_window);
  read_opt(j, "fp_max_iter", cfg.fp_max_iter);
  read_opt(j, "fp_tol", cfg.fp_tol);
  read_opt(j, "metrics_dump", cfg.metrics_dump);
  finalize_config(cfg);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  return json{{"version", kConfigVersion},
              {"K", cfg.num_cells},
              {"N", cfg.num_links},
              {"M", cfg.num_subbands},
              {"cell_radius_m", cfg.cell_radius_m},
              {"min_distance_m", cfg.min_distance_m},
              {"shadow_std_db", cfg.shadow_std_db},
              {"f_d_hz", cfg.f_d_hz},
              {"slot_T_s", cfg.slot_T_s},
              {"P_max_dbm", cfg.p_max_dbm},
              {"noise_dbm", cfg.noise_dbm},
              {"sinr_cap_db", cfg.sinr_cap_db},
              {"c", cfg.c},
              {"episodes", cfg.episodes},
              {"slots_per_episode", cfg.slots_per_episode},
              {"seeds", cfg.seeds},
              {"scheme", scheme_name(cfg.scheme)},
              {"learner", learner_config_to_json(cfg.learner)},
              {"test_deployments", cfg.test_deployments},
              {"test_slots", cfg.test_slots},
              {"test_warmup", cfg.test_warmup},
              {"ma_window", cfg.ma_window},
              {"fp_max_iter", cfg.fp_max_iter},
              {"fp_tol", cfg.fp_tol},
              {"metrics_dump", cfg.metrics_dump}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

EnvConfig env_config(const ExperimentConfig& cfg, bool build_states) {
  EnvConfig e;
  e.num_subbands = cfg.num_subbands;
  e.c = cfg.c;
  e.noise_w = cfg.noise_w;
  e.p_max_w = cfg.p_max_w;
  e.sinr_cap_db = cfg.sinr_cap_db;
  e.rho = cfg.rho;
  e.build_states = build_states;
  return e;
}

std::uint64_t training_episode_seed(std::uint64_t master, int episode) {
  return derive_seed(master, Stream::kDeployment, static_cast<std::uint64_t>(episode));
}

std::uint64_t test_deployment_seed(std::uint64_t master, int index) {
  return derive_seed(master, Stream::kTestDeployment, static_cast<std::uint64_t>(index));
}

Realization make_realization(const ExperimentConfig& cfg, std::uint64_t base) {
  Realization r;
  r.deployment = generate_deployment(cfg.num_cells, cfg.num_links, cfg.cell_radius_m,
                                     derive_seed(base, Stream::kDeployment), cfg.min_distance_m);
  r.beta = sample_large_scale(r.deployment, cfg.shadow_std_db, derive_seed(base, Stream::kShadowing));
  r.fading_seed = derive_seed(base, Stream::kFadingInit);
  r.innovation_seed = derive_seed(base, Stream::kInnovation);
  return r;
}

json record_to_json(const RunRecord& rec) {
  json rows = json::array();
  for (const auto& r : rec.test_rows) {
    json row{{"K", r.num_cells},        {"N", r.num_links},
             {"M", r.num_subbands},     {"scheme", r.scheme},
             {"sum_rate_per_link", r.sum_rate_per_link},
             {"q_output_size", r.q_output_size}};
    row["fp_mean_iterations"] =
        r.fp_mean_iterations ? json(*r.fp_mean_iterations) : json(nullptr);
    rows.push_back(row);
  }
  auto series = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isnan(x) ? json(nullptr) : json(x));
    return a;
  };
  return json{{"seed", rec.seed},
              {"scheme", rec.scheme},
              {"environment_steps", rec.environment_steps},
              {"allocations_checked", rec.allocations_checked},
              {"wall_clock_s", rec.wall_clock_s},
              {"test_rows", rows},
              {"training",
               {{"sum_rate", series(rec.training.sum_rate)},
                {"mean_reward", series(rec.training.mean_reward)},
                {"loss_q", series(rec.training.loss_q)},
                {"loss_critic", series(rec.training.loss_critic)},
                {"epsilon_top", series(rec.training.eps_top)},
                {"epsilon_bottom", series(rec.training.eps_bottom)}}}};
}

RunRecord record_from_json(const json& j) {
  RunRecord rec;
  read_opt(j, "seed", rec.seed);
  read_opt(j, "scheme", rec.scheme);
  read_opt(j, "environment_steps", rec.environment_steps);
  read_opt(j, "allocations_checked", rec.allocations_checked);
  read_opt(j, "wall_clock_s", rec.wall_clock_s);
  if (j.contains("test_rows")) {
    for (const auto& r : j.at("test_rows")) {
      TestRow row;
      r.at("K").get_to(row.num_cells);
      r.at("N").get_to(row.num_links);
      r.at("M").get_to(row.num_subbands);
      r.at("scheme").get_to(row.scheme);
      r.at("sum_rate_per_link").get_to(row.sum_rate_per_link);
      r.at("q_output_size").get_to(row.q_output_size);
      if (r.contains("fp_mean_iterations") && !r.at("fp_mean_iterations").is_null()) {
        row.fp_mean_iterations = r.at("fp_mean_iterations").get<double>();
      }
      rec.test_rows.push_back(row);
    }
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    auto load = [&](const char* key, std::vector<double>& out) {
      if (!t.contains(key)) return;
      for (const auto& v : t.at(key)) out.push_back(v.is_null() ? kNaN : v.get<double>());
    };
    load("sum_rate", rec.training.sum_rate);
    load("mean_reward", rec.training.mean_reward);
    load("loss_q", rec.training.loss_q);
    load("loss_critic", rec.training.loss_critic);
    load("epsilon_top", rec.training.eps_top);
    load("epsilon_bottom", rec.training.eps_bottom);
  }
  return rec;
}

std::unique_ptr<Learner> make_learner(const ExperimentConfig& cfg, std::uint64_t seed) {
  Rng init = make_stream(seed, Stream::kNetworkInit);
  switch (cfg.scheme) {
    case Scheme::kProposed:
      return std::make_unique<TwoLayerLearner>(cfg.num_subbands, cfg.c, cfg.learner, cfg.p_max_w,
                                               init);
    case Scheme::kJoint:
      return std::make_unique<JointLearner>(cfg.num_subbands, cfg.c, cfg.learner, cfg.p_max_w,
                                            init);
    default:
      throw std::invalid_argument("scheme '" + scheme_name(cfg.scheme) + "' does not train");
  }
}

TrainingResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                            std::unique_ptr<Learner> resume) {
  if (!is_learner(cfg.scheme)) {
    throw std::invalid_argument("scheme '" + scheme_name(cfg.scheme) + "' does not train");
  }
  const auto start = std::chrono::steady_clock::now();
  TrainingResult out;
  out.learner = resume ? std::move(resume) : make_learner(cfg, seed);
  if (out.learner->scheme() != scheme_name(cfg.scheme)) {
    throw std::invalid_argument("checkpoint scheme '" + out.learner->scheme() +
                                "' does not match config scheme '" + scheme_name(cfg.scheme) + "'");
  }
  Learner& learner = *out.learner;
  RunRecord& rec = out.record;
  rec.seed = seed;
  rec.scheme = scheme_name(cfg.scheme);
  const int slots = cfg.slots_per_episode;
  auto& tr = rec.training;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    learner.begin_episode();
    const std::uint64_t base = training_episode_seed(seed, ep);
    Realization real = make_realization(cfg, base);
    Environment env(env_config(cfg), std::move(real.deployment), std::move(real.beta),
                    real.fading_seed, real.innovation_seed, learner.normalizer());
    Rng explore = make_stream(seed, Stream::kExploration, static_cast<std::uint64_t>(ep));
    Rng replay = make_stream(seed, Stream::kReplay, static_cast<std::uint64_t>(ep));
    Rng boot = make_stream(seed, Stream::kBootstrap, static_cast<std::uint64_t>(ep));

    // Slot 0 has no history; every link transmits at random.
    const Allocation first = random_alloc(boot, cfg.num_links, cfg.num_subbands, cfg.p_max_w);
    check_allocation(first, cfg, rec.allocations_checked);
    StepResult res = env.step(first);
    ++rec.environment_steps;
    tr.sum_rate.push_back(res.metrics.sum_rate);
    tr.mean_reward.push_back(mean_of(res.rewards));
    tr.loss_q.push_back(kNaN);
    tr.loss_critic.push_back(kNaN);
    tr.eps_top.push_back(learner.epsilon_top(0));
    tr.eps_bottom.push_back(learner.epsilon_bottom(0));

    std::vector<AgentDecision> decisions;
    for (int t = 1; t < slots; ++t) {
      const TickReport tick = learner.trainer_tick(t, replay);
      const std::vector<AgentState> states = env.states();
      const Allocation alloc = learner.act(states, t, true, explore, decisions);
      check_allocation(alloc, cfg, rec.allocations_checked);
      res = env.step(alloc);
      ++rec.environment_steps;
      learner.record(t, states, decisions, res.rewards, *res.next_states);
      tr.sum_rate.push_back(res.metrics.sum_rate);
      tr.mean_reward.push_back(mean_of(res.rewards));
      tr.loss_q.push_back(tick.loss_q.value_or(kNaN));
      tr.loss_critic.push_back(tick.loss_critic.value_or(kNaN));
      tr.eps_top.push_back(learner.epsilon_top(t));
      tr.eps_bottom.push_back(learner.epsilon_bottom(t));
    }
    learner.normalizer()->freeze();
  }
  rec.wall_clock_s = seconds_since(start);
  return out;
}

RunRecord run_test(const ExperimentConfig& cfg, std::uint64_t seed, Learner& learner,
                   const TestOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  learner.sync_acting_to_masters();
  RunRecord rec;
  rec.seed = seed;
  rec.scheme = learner.scheme();
  // Local copy so the evaluation can never move the statistics.
  auto normalizer = std::make_shared<FeatureNormalizer>(*learner.normalizer());
  normalizer->freeze();

  double total = 0.0;
  long scored = 0;
  std::vector<AgentDecision> decisions;
  for (int d = 0; d < cfg.test_deployments; ++d) {
    const std::uint64_t base = test_deployment_seed(seed, d);
    Realization real = make_realization(cfg, base);
    Environment env(env_config(cfg), std::move(real.deployment), std::move(real.beta),
                    real.fading_seed, real.innovation_seed, normalizer);
    Rng boot = make_stream(base, Stream::kBootstrap);
    Rng unused = make_stream(base, Stream::kExploration);

    const Allocation first = random_alloc(boot, cfg.num_links, cfg.num_subbands, cfg.p_max_w);
    env.step(first);
    ++rec.environment_steps;
    const int last = cfg.test_warmup + cfg.test_slots;
    for (int t = 1; t < last; ++t) {
      const Allocation alloc = learner.act(env.states(), t, false, unused, decisions);
      check_allocation(alloc, cfg, rec.allocations_checked);
      const GainTensor g = env.gains();
      const StepResult res = env.step(alloc);
      ++rec.environment_steps;
      if (t < cfg.test_warmup) continue;
      total += res.metrics.sum_rate;
      ++scored;
      if (options.dump) {
        // Dump rewards use the slot's own neighbor sets, as for the baselines.
        const auto r = rewards_for(g, alloc, cfg);
        append_dump(*options.dump, static_cast<long>(d) * cfg.test_slots + (t - cfg.test_warmup), g,
                    alloc, res.metrics, r);
      }
    }
  }
  TestRow row = base_row(cfg, learner.scheme());
  row.sum_rate_per_link = total / static_cast<double>(scored) / cfg.num_links;
  row.q_output_size = learner.output_size_label();
  rec.test_rows.push_back(row);
  rec.wall_clock_s = seconds_since(start);
  return rec;
}

RunRecord run_benchmark(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::vector<Scheme>& schemes, const TestOptions& options) {
  if (schemes.empty()) throw std::invalid_argument("no schemes to benchmark");
  for (Scheme s : schemes) {
    if (is_learner(s)) {
      throw std::invalid_argument("scheme '" + scheme_name(s) + "' needs a checkpoint");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  auto wants = [&](Scheme s) { return std::find(schemes.begin(), schemes.end(), s) != schemes.end(); };
  const bool need_fp = wants(Scheme::kIdealFp) || wants(Scheme::kDelayedFp);
  const FpOptions fp_opt = fp_options(cfg);

  RunRecord rec;
  rec.seed = seed;
  rec.scheme = scheme_name(schemes.front());
  struct Acc {
    double total = 0.0;
    double iterations = 0.0;
    long solves = 0;
  };
  Acc ideal, delayed, random;
  long scored = 0;

  for (int d = 0; d < cfg.test_deployments; ++d) {
    const std::uint64_t base = test_deployment_seed(seed, d);
    Realization real = make_realization(cfg, base);
    Environment env(env_config(cfg, false), std::move(real.deployment), std::move(real.beta),
                    real.fading_seed, real.innovation_seed);
    Rng rng = make_stream(base, Stream::kRandomBaseline);
    std::optional<FpResult> prev_ideal;
    const int last = cfg.test_warmup + cfg.test_slots;
    for (int t = 0; t < last; ++t) {
      const bool scoring = t >= cfg.test_warmup;
      const GainTensor& g = env.gains();
      // The random scheme drives the environment; fading does not depend on
      // the allocation, so every scheme sees the same channel.
      const Allocation rand_alloc = random_alloc(rng, cfg.num_links, cfg.num_subbands, cfg.p_max_w);
      check_allocation(rand_alloc, cfg, rec.allocations_checked);
      const long dump_slot = static_cast<long>(d) * cfg.test_slots + (t - cfg.test_warmup);

      std::optional<FpResult> now_ideal;
      if (need_fp && (scoring || t == cfg.test_warmup - 1)) {
        now_ideal = fp_solve(g, fp_opt);
        check_allocation(now_ideal->alloc, cfg, rec.allocations_checked);
      }
      if (scoring) {
        ++scored;
        for (Scheme s : schemes) {
          const Allocation* alloc = nullptr;
          Acc* acc = nullptr;
          if (s == Scheme::kIdealFp) {
            alloc = &now_ideal->alloc;
            acc = &ideal;
            acc->iterations += now_ideal->state.iterations;
            ++acc->solves;
          } else if (s == Scheme::kDelayedFp) {
            // The previous slot's ideal solve is exactly what a delayed
            // solver would compute from slot t - 1 gains.
            alloc = &prev_ideal->alloc;
            acc = &delayed;
            acc->iterations += prev_ideal->state.iterations;
            ++acc->solves;
          } else {
            alloc = &rand_alloc;
            acc = &random;
          }
          const SlotMetrics m = evaluate_slot(g, *alloc, cfg.noise_w, cfg.sinr_cap_db);
          acc->total += m.sum_rate;
          if (options.dump && s == schemes.front()) {
            append_dump(*options.dump, dump_slot, g, *alloc, m, rewards_for(g, *alloc, cfg));
          }
        }
      }
      prev_ideal = std::move(now_ideal);
      env.step(rand_alloc);
      ++rec.environment_steps;
    }
  }

  for (Scheme s : schemes) {
    TestRow row = base_row(cfg, scheme_name(s));
    const Acc& acc = s == Scheme::kIdealFp ? ideal : s == Scheme::kDelayedFp ? delayed : random;
    row.sum_rate_per_link = acc.total / static_cast<double>(scored) / cfg.num_links;
    row.q_output_size = "n/a";
    if (acc.solves > 0) row.fp_mean_iterations = acc.iterations / static_cast<double>(acc.solves);
    rec.test_rows.push_back(row);
  }
  rec.wall_clock_s = seconds_since(start);
  return rec;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  if (window < 1) throw std::invalid_argument("window must be positive");
  std::vector<double> out(x.size());
  double run = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    run += x[t];
    if (t >= static_cast<std::size_t>(window)) run -= x[t - window];
    out[t] = run / static_cast<double>(std::min<std::size_t>(t + 1, window));
  }
  return out;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_training_curve(const std::filesystem::path& path, const TrainingSeries& series,
                          int window) {
  const auto ma = moving_average(series.mean_reward, window);
  std::ostringstream os;
  os << "slot,reward_ma,loss_q,loss_critic,epsilon_top,epsilon_bottom\n";
  for (std::size_t t = 0; t < ma.size(); ++t) {
    os << t << ',' << fmt(ma[t]) << ',' << fmt(series.loss_q[t]) << ','
       << fmt(series.loss_critic[t]) << ',' << fmt(series.eps_top[t]) << ','
       << fmt(series.eps_bottom[t]) << '\n';
  }
  write_text_atomic(path, os.str());
}

std::string table_csv(const std::vector<TestRow>& rows) {
  std::ostringstream os;
  os << "K,N,M,scheme,sum_rate_per_link,q_output_size,fp_mean_iterations\n";
  for (const auto& r : rows) {
    os << r.num_cells << ',' << r.num_links << ',' << r.num_subbands << ',' << r.scheme << ','
       << fmt(r.sum_rate_per_link) << ',' << r.q_output_size << ','
       << (r.fp_mean_iterations ? fmt(*r.fp_mean_iterations) : std::string()) << '\n';
  }
  return os.str();
}

void emit_table(const std::filesystem::path& path, const std::vector<TestRow>& rows) {
  write_text_atomic(path, table_csv(rows));
}

void write_metrics_dump(const std::filesystem::path& path, const std::vector<DumpRow>& rows) {
  std::ostringstream os;
  os << "slot,link,subband,power_dBm,sinr_dB,rate,reward\n";
  for (const auto& r : rows) {
    const double p_dbm = r.power_w > 0.0 ? watts_to_dbm(r.power_w)
                                         : -std::numeric_limits<double>::infinity();
    const double sinr_db = r.sinr > 0.0 ? 10.0 * std::log10(r.sinr)
                                        : -std::numeric_limits<double>::infinity();
    os << r.slot << ',' << r.link << ',' << r.subband << ',' << fmt(p_dbm) << ',' << fmt(sinr_db)
       << ',' << fmt(r.rate) << ',' << fmt(r.reward) << '\n';
  }
  write_text_atomic(path, os.str());
}

}  // namespace jointrl
