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

#include "jointrl/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace jointrl {

namespace {

constexpr double kDbFloor = -174.0;

double to_db(double x) { return std::max(kDbFloor, 10.0 * std::log10(x)); }
double to_dbm(double watts) { return std::max(kDbFloor, 10.0 * std::log10(watts) + 30.0); }

// Top-c candidates under (on-subband first, key descending, index ascending).
std::vector<int> top_candidates(int self, int c, const std::vector<double>& key,
                                const std::vector<std::uint8_t>& on_subband) {
  std::vector<int> cand;
  cand.reserve(key.size());
  for (int i = 0; i < static_cast<int>(key.size()); ++i) {
    if (i != self) cand.push_back(i);
  }
  auto better = [&](int a, int b) {
    if (on_subband[a] != on_subband[b]) return on_subband[a] > on_subband[b];
    if (key[a] != key[b]) return key[a] > key[b];
    return a < b;
  };
  const std::size_t keep = std::min<std::size_t>(c, cand.size());
  std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), better);
  cand.resize(keep);
  return cand;
}

}  // namespace

void validate_allocation(const Allocation& alloc, int num_subbands, double p_max) {
  if (alloc.subband.size() != alloc.power.size()) {
    throw std::invalid_argument("allocation has mismatched subband/power lengths");
  }
  for (int n = 0; n < alloc.num_links(); ++n) {
    const int m = alloc.subband[n];
    if (m < 0 || m >= num_subbands) {
      throw std::invalid_argument("link " + std::to_string(n) + " selects subband " +
                                  std::to_string(m + 1) + " outside 1.." +
                                  std::to_string(num_subbands));
    }
    const double p = alloc.power[n];
    if (!(p >= 0.0 && p <= p_max)) {
      throw std::invalid_argument("link " + std::to_string(n) + " power " + std::to_string(p) +
                                  " W outside [0, " + std::to_string(p_max) + "]");
    }
  }
}

std::vector<double> received_interference(const GainTensor& g, const Allocation& alloc) {
  const int n_links = g.num_links;
  const int m_count = g.num_subbands;
  std::vector<double> out(static_cast<std::size_t>(n_links) * m_count, 0.0);
  for (int rx = 0; rx < n_links; ++rx) {
    for (int l = 0; l < n_links; ++l) {
      if (l == rx) continue;
      const int m = alloc.subband[l];
      out[nm(rx, m, m_count)] += g(l, rx, m) * alloc.power[l];
    }
  }
  return out;
}

std::vector<double> compute_sinr(const GainTensor& g, const Allocation& alloc, double noise_w) {
  if (!(noise_w > 0.0)) throw std::invalid_argument("noise power must be positive");
  const int m_count = g.num_subbands;
  const auto interference = received_interference(g, alloc);
  std::vector<double> sinr(interference.size(), 0.0);
  for (int n = 0; n < g.num_links; ++n) {
    const int m = alloc.subband[n];
    sinr[nm(n, m, m_count)] = g(n, n, m) * alloc.power[n] / (interference[nm(n, m, m_count)] + noise_w);
  }
  return sinr;
}

double spectral_efficiency(double gamma, double cap_db) {
  const double cap = std::pow(10.0, cap_db / 10.0);
  return std::log2(1.0 + std::min(gamma, cap));
}

SlotMetrics evaluate_slot(const GainTensor& g, const Allocation& alloc, double noise_w,
                          double cap_db) {
  SlotMetrics out;
  out.num_links = g.num_links;
  out.num_subbands = g.num_subbands;
  out.sinr = compute_sinr(g, alloc, noise_w);
  out.rate.resize(out.sinr.size());
  out.link_rate.assign(g.num_links, 0.0);
  for (int n = 0; n < g.num_links; ++n) {
    for (int m = 0; m < g.num_subbands; ++m) {
      const double r = spectral_efficiency(out.sinr[nm(n, m, g.num_subbands)], cap_db);
      out.rate[nm(n, m, g.num_subbands)] = r;
      out.link_rate[n] += r;
    }
    out.sum_rate += out.link_rate[n];
  }
  return out;
}

NeighborSets build_neighbor_sets(const GainTensor& g_prev, const Allocation& alloc_prev, int c,
                                 double noise_w) {
  if (c < 1) throw std::invalid_argument("neighbor count must be >= 1");
  const int n_links = g_prev.num_links;
  const int m_count = g_prev.num_subbands;
  NeighborSets sets;
  sets.num_links = n_links;
  sets.num_subbands = m_count;
  sets.c = c;
  sets.interferers.resize(static_cast<std::size_t>(n_links) * m_count);
  sets.interfered.resize(sets.interferers.size());

  const auto interference = received_interference(g_prev, alloc_prev);
  std::vector<double> key(n_links);
  std::vector<std::uint8_t> on(n_links);
  for (int m = 0; m < m_count; ++m) {
    for (int l = 0; l < n_links; ++l) on[l] = alloc_prev.subband[l] == m ? 1 : 0;
    for (int n = 0; n < n_links; ++n) {
      for (int i = 0; i < n_links; ++i) key[i] = g_prev(i, n, m);
      sets.interferers[nm(n, m, m_count)] = top_candidates(n, c, key, on);

      for (int j = 0; j < n_links; ++j) {
        // Denominator is j's full interference plus noise, n's term included.
        key[j] = g_prev(n, j, m) / (interference[nm(j, m, m_count)] + noise_w);
      }
      sets.interfered[nm(n, m, m_count)] = top_candidates(n, c, key, on);
    }
  }
  return sets;
}

std::vector<int> rank_subbands(const GainTensor& g, std::span<const double> interference,
                               double noise_w) {
  const int n_links = g.num_links;
  const int m_count = g.num_subbands;
  std::vector<int> rank(static_cast<std::size_t>(n_links) * m_count);
  std::vector<double> ratio(m_count);
  std::vector<int> order(m_count);
  for (int n = 0; n < n_links; ++n) {
    for (int m = 0; m < m_count; ++m) {
      ratio[m] = g(n, n, m) / (interference[nm(n, m, m_count)] + noise_w);
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ratio[a] > ratio[b]; });
    for (int pos = 0; pos < m_count; ++pos) rank[nm(n, order[pos], m_count)] = pos + 1;
  }
  return rank;
}

double externality(int j, int n, const GainTensor& g, const Allocation& alloc, double noise_w,
                   double cap_db) {
  const int m = alloc.subband[n];
  if (j == n || alloc.subband[j] != m) return 0.0;
  double others = 0.0;
  for (int l = 0; l < g.num_links; ++l) {
    if (l == j || l == n || alloc.subband[l] != m) continue;
    others += g(l, j, m) * alloc.power[l];
  }
  const double signal = g(j, j, m) * alloc.power[j];
  const double from_n = g(n, j, m) * alloc.power[n];
  const double without = spectral_efficiency(signal / (others + noise_w), cap_db);
  const double with = spectral_efficiency(signal / (others + from_n + noise_w), cap_db);
  return without - with;
}

double reward(int n, const GainTensor& g, const Allocation& alloc, const NeighborSets& sets_next,
              double noise_w, double cap_db) {
  const int m = alloc.subband[n];
  double interference = 0.0;
  for (int l = 0; l < g.num_links; ++l) {
    if (l != n && alloc.subband[l] == m) interference += g(l, n, m) * alloc.power[l];
  }
  const double own = spectral_efficiency(g(n, n, m) * alloc.power[n] / (interference + noise_w),
                                         cap_db);
  double penalty = 0.0;
  for (int j : sets_next.interfered_of(n, m)) {
    penalty += externality(j, n, g, alloc, noise_w, cap_db);
  }
  return own - penalty;
}

// ---------------------------------------------------------------------------

std::vector<FeatureKind> feature_layout(int c) {
  std::vector<FeatureKind> layout = {FeatureKind::kPower, FeatureKind::kRate, FeatureKind::kRank,
                                     FeatureKind::kDirectGain, FeatureKind::kInterference};
  for (int k = 0; k < c; ++k) {
    layout.insert(layout.end(), {FeatureKind::kCrossGain, FeatureKind::kPower, FeatureKind::kRate,
                                 FeatureKind::kRank});
  }
  for (int k = 0; k < c; ++k) {
    layout.insert(layout.end(), {FeatureKind::kCrossGain, FeatureKind::kDirectGain,
                                 FeatureKind::kRate, FeatureKind::kRank,
                                 FeatureKind::kInterference});
  }
  return layout;
}

RawState build_raw_state(int n, const StateContext& ctx) {
  if (ctx.prev == nullptr || ctx.gains_now == nullptr || ctx.sets == nullptr) {
    throw std::logic_error("agent state requested before any slot history exists");
  }
  const int m_count = ctx.num_subbands;
  const int len = state_length(ctx.c);
  const GainTensor& g_now = *ctx.gains_now;
  const SlotSnapshot& prev = *ctx.prev;
  const double rate_scale = std::log2(1.0 + std::pow(10.0, ctx.sinr_cap_db / 10.0));
  const double rank_scale = m_count > 1 ? 1.0 / (m_count - 1) : 0.0;

  auto power_on = [&](int l, int m) {
    return prev.alloc.subband[l] == m ? prev.alloc.power[l] / ctx.p_max_w : 0.0;
  };
  auto rank_feature = [&](int z) { return (z - 1) * rank_scale; };

  RawState raw;
  raw.per_subband = len;
  raw.num_subbands = m_count;
  raw.values.assign(static_cast<std::size_t>(len) * m_count, 0.0);
  raw.present.assign(raw.values.size(), 0);

  for (int m = 0; m < m_count; ++m) {
    double* v = raw.values.data() + static_cast<std::size_t>(m) * len;
    std::uint8_t* p = raw.present.data() + static_cast<std::size_t>(m) * len;
    int pos = 0;
    auto put = [&](double x) {
      v[pos] = x;
      p[pos] = 1;
      ++pos;
    };
    put(power_on(n, m));
    put(prev.link_rate[n] / rate_scale);
    put(rank_feature(ctx.rank_now[nm(n, m, m_count)]));
    put(to_db(g_now(n, n, m)));
    put(to_dbm(ctx.interference_now[nm(n, m, m_count)]));

    const auto& interferers = ctx.sets->interferers_of(n, m);
    for (int k = 0; k < ctx.c; ++k) {
      if (k >= static_cast<int>(interferers.size())) {
        pos += 4;
        continue;
      }
      const int i = interferers[k];
      put(to_db(g_now(i, n, m)));
      put(power_on(i, m));
      put(prev.link_rate[i] / rate_scale);
      put(rank_feature(prev.rank[nm(i, m, m_count)]));
    }
    const auto& interfered = ctx.sets->interfered_of(n, m);
    for (int k = 0; k < ctx.c; ++k) {
      if (k >= static_cast<int>(interfered.size())) {
        pos += 5;
        continue;
      }
      const int j = interfered[k];
      put(to_db(prev.gains(n, j, m)));
      put(to_db(prev.gains(j, j, m)));
      put(prev.link_rate[j] / rate_scale);
      put(rank_feature(prev.rank[nm(j, m, m_count)]));
      put(to_dbm(prev.interference[nm(j, m, m_count)]));
    }
  }
  return raw;
}

FeatureNormalizer::FeatureNormalizer(int c) : c_(c), layout_(feature_layout(c)) {}

void FeatureNormalizer::observe(const RawState& raw) {
  if (frozen_) return;
  const int len = static_cast<int>(layout_.size());
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    if (!raw.present[i]) continue;
    const FeatureKind kind = layout_[i % len];
    if (kind != FeatureKind::kDirectGain && kind != FeatureKind::kCrossGain &&
        kind != FeatureKind::kInterference) {
      continue;
    }
    Moments& mo = moments_[static_cast<int>(kind)];
    mo.count += 1.0;
    const double delta = raw.values[i] - mo.mean;
    mo.mean += delta / mo.count;
    mo.m2 += delta * (raw.values[i] - mo.mean);
  }
}

double FeatureNormalizer::mean(FeatureKind kind) const {
  return moments_[static_cast<int>(kind)].mean;
}

double FeatureNormalizer::stddev(FeatureKind kind) const {
  const Moments& mo = moments_[static_cast<int>(kind)];
  if (mo.count < 2.0) return 1.0;
  const double sd = std::sqrt(mo.m2 / (mo.count - 1.0));
  return sd > 1e-6 ? sd : 1.0;
}

std::vector<double> FeatureNormalizer::normalize(const RawState& raw) const {
  const int len = static_cast<int>(layout_.size());
  if (raw.per_subband != len) throw std::invalid_argument("state length does not match layout");
  std::vector<double> out(raw.values.size(), 0.0);
  std::array<double, kNumFeatureKinds> shift{};
  std::array<double, kNumFeatureKinds> scale{};
  for (int k = 0; k < kNumFeatureKinds; ++k) {
    const auto kind = static_cast<FeatureKind>(k);
    const bool db = kind == FeatureKind::kDirectGain || kind == FeatureKind::kCrossGain ||
                    kind == FeatureKind::kInterference;
    shift[k] = db ? mean(kind) : 0.0;
    scale[k] = db ? 1.0 / stddev(kind) : 1.0;
  }
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    if (!raw.present[i]) continue;
    const int k = static_cast<int>(layout_[i % len]);
    out[i] = (raw.values[i] - shift[k]) * scale[k];
  }
  return out;
}

nlohmann::json FeatureNormalizer::to_json() const {
  nlohmann::json j;
  j["c"] = c_;
  j["frozen"] = frozen_;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& mo : moments_) arr.push_back({mo.count, mo.mean, mo.m2});
  j["moments"] = arr;
  return j;
}

FeatureNormalizer FeatureNormalizer::from_json(const nlohmann::json& j) {
  FeatureNormalizer out(j.at("c").get<int>());
  out.frozen_ = j.at("frozen").get<bool>();
  const auto& arr = j.at("moments");
  for (int k = 0; k < kNumFeatureKinds; ++k) {
    out.moments_[k] = {arr.at(k).at(0).get<double>(), arr.at(k).at(1).get<double>(),
                       arr.at(k).at(2).get<double>()};
  }
  return out;
}

AgentState build_state(int n, const StateContext& ctx, const FeatureNormalizer& normalizer) {
  const RawState raw = build_raw_state(n, ctx);
  AgentState s;
  s.per_subband = raw.per_subband;
  s.num_subbands = raw.num_subbands;
  s.top = std::make_shared<const std::vector<double>>(normalizer.normalize(raw));
  s.rank.resize(ctx.num_subbands);
  for (int m = 0; m < ctx.num_subbands; ++m) s.rank[m] = ctx.rank_now[nm(n, m, ctx.num_subbands)];
  return s;
}

// ---------------------------------------------------------------------------

Environment::Environment(EnvConfig cfg, Deployment dep, LargeScaleFading beta,
                         std::uint64_t fading_seed, std::uint64_t innovation_seed,
                         std::shared_ptr<FeatureNormalizer> normalizer)
    : cfg_(cfg),
      deployment_(std::move(dep)),
      beta_(std::move(beta)),
      innovation_rng_(innovation_seed),
      normalizer_(std::move(normalizer)) {
  if (cfg_.num_subbands < 1) throw std::invalid_argument("need at least one subband");
  if (!(cfg_.noise_w > 0.0) || !(cfg_.p_max_w > 0.0)) {
    throw std::invalid_argument("noise and P_max must be positive");
  }
  if (!normalizer_) normalizer_ = std::make_shared<FeatureNormalizer>(cfg_.c);
  Rng init_rng(fading_seed);
  fading_ = init_fading(deployment_.num_links, cfg_.num_subbands, cfg_.rho, init_rng);
  gains_ = jointrl::gains(beta_, fading_, 0);
  interference_now_.assign(static_cast<std::size_t>(deployment_.num_links) * cfg_.num_subbands,
                           0.0);
  rank_now_ = rank_subbands(gains_, interference_now_, cfg_.noise_w);
}

const SlotSnapshot& Environment::previous() const {
  if (!prev_) throw std::logic_error("no previous slot yet");
  return *prev_;
}

const NeighborSets& Environment::neighbor_sets() const {
  if (!prev_) throw std::logic_error("neighbor sets need a previous slot");
  return sets_;
}

const std::vector<AgentState>& Environment::states() const {
  if (!prev_) throw std::logic_error("agent state requested before any slot history exists");
  if (!cfg_.build_states) throw std::logic_error("state construction is disabled");
  return states_;
}

StepResult Environment::step(const Allocation& alloc) {
  validate_allocation(alloc, cfg_.num_subbands, cfg_.p_max_w);
  if (alloc.num_links() != deployment_.num_links) {
    throw std::invalid_argument("allocation covers " + std::to_string(alloc.num_links()) +
                                " links, expected " + std::to_string(deployment_.num_links));
  }
  StepResult result;
  result.metrics = evaluate_slot(gains_, alloc, cfg_.noise_w, cfg_.sinr_cap_db);

  // Sets for slot t+1 come from slot-t measurements; the reward uses them.
  NeighborSets next_sets = build_neighbor_sets(gains_, alloc, cfg_.c, cfg_.noise_w);
  result.rewards.resize(deployment_.num_links);
  for (int n = 0; n < deployment_.num_links; ++n) {
    result.rewards[n] = reward(n, gains_, alloc, next_sets, cfg_.noise_w, cfg_.sinr_cap_db);
  }

  auto snap = std::make_unique<SlotSnapshot>();
  snap->gains = std::move(gains_);
  snap->alloc = alloc;
  snap->link_rate = result.metrics.link_rate;
  snap->rank = std::move(rank_now_);
  snap->interference = received_interference(snap->gains, alloc);
  prev_ = std::move(snap);
  sets_ = std::move(next_sets);

  ++slot_;
  fading_ = evolve_fading(fading_, innovation_rng_);
  gains_ = jointrl::gains(beta_, fading_, slot_);
  interference_now_ = received_interference(gains_, prev_->alloc);
  rank_now_ = rank_subbands(gains_, interference_now_, cfg_.noise_w);

  if (cfg_.build_states) {
    rebuild_states();
    result.next_states = &states_;
  }
  return result;
}

void Environment::rebuild_states() {
  StateContext ctx;
  ctx.num_subbands = cfg_.num_subbands;
  ctx.c = cfg_.c;
  ctx.p_max_w = cfg_.p_max_w;
  ctx.sinr_cap_db = cfg_.sinr_cap_db;
  ctx.gains_now = &gains_;
  ctx.rank_now = rank_now_;
  ctx.interference_now = interference_now_;
  ctx.prev = prev_.get();
  ctx.sets = &sets_;

  const int n_links = deployment_.num_links;
  std::vector<RawState> raws;
  raws.reserve(n_links);
  for (int n = 0; n < n_links; ++n) raws.push_back(build_raw_state(n, ctx));
  if (!normalizer_->frozen()) {
    for (const auto& raw : raws) normalizer_->observe(raw);
  }
  states_.clear();
  states_.reserve(n_links);
  for (int n = 0; n < n_links; ++n) {
    AgentState s;
    s.per_subband = raws[n].per_subband;
    s.num_subbands = raws[n].num_subbands;
    s.top = std::make_shared<const std::vector<double>>(normalizer_->normalize(raws[n]));
    s.rank.resize(cfg_.num_subbands);
    for (int m = 0; m < cfg_.num_subbands; ++m) s.rank[m] = rank_now_[nm(n, m, cfg_.num_subbands)];
    states_.push_back(std::move(s));
  }
}

}  // namespace jointrl
