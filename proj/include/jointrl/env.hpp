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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "jointrl/channel.hpp"
#include "jointrl/rng.hpp"

namespace jointrl {

/// Per-link subband (0-based) and transmit power in watts for one slot.
struct Allocation {
  std::vector<int> subband;
  std::vector<double> power;

  int num_links() const { return static_cast<int>(subband.size()); }
};

/// Throws std::invalid_argument naming the offending link when a power lies
/// outside [0, p_max] or a subband index is out of range.
void validate_allocation(const Allocation& alloc, int num_subbands, double p_max);

/// Row-major N x M matrix helpers; entry (n, m) lives at n * M + m.
inline std::size_t nm(int n, int m, int num_subbands) {
  return static_cast<std::size_t>(n) * num_subbands + m;
}

/// Co-channel interference power at every receiver on every subband:
/// sum over l != n of alpha(l, m) g(l -> n, m) p(l). Gains and allocation
/// may come from different slots.
std::vector<double> received_interference(const GainTensor& g, const Allocation& alloc);

std::vector<double> compute_sinr(const GainTensor& g, const Allocation& alloc, double noise_w);

/// log2(1 + min(gamma, 10^(cap_db / 10))).
double spectral_efficiency(double gamma, double cap_db);

struct SlotMetrics {
  int num_links = 0;
  int num_subbands = 0;
  std::vector<double> sinr;  // N x M
  std::vector<double> rate;  // N x M, bps/Hz
  std::vector<double> link_rate;
  double sum_rate = 0.0;
};

SlotMetrics evaluate_slot(const GainTensor& g, const Allocation& alloc, double noise_w,
                          double cap_db);

/// Interferer (I) and interfered (O) neighbor lists per (link, subband).
struct NeighborSets {
  int num_links = 0;
  int num_subbands = 0;
  int c = 0;
  std::vector<std::vector<int>> interferers;
  std::vector<std::vector<int>> interfered;

  const std::vector<int>& interferers_of(int n, int m) const {
    return interferers[nm(n, m, num_subbands)];
  }
  const std::vector<int>& interfered_of(int n, int m) const {
    return interfered[nm(n, m, num_subbands)];
  }
};

/// Candidates on subband m in the previous slot come first, each group
/// sorted by descending key, ties by ascending link index. Interferers are
/// keyed by g(i -> n, m); interfered receivers by g(n -> j, m) over j's
/// interference-plus-noise.
NeighborSets build_neighbor_sets(const GainTensor& g_prev, const Allocation& alloc_prev,
                                 int c, double noise_w);

/// Ranks 1..M per link of g(n -> n, m) / (interference(n, m) + noise), rank 1
/// best, ties to the lower subband.
std::vector<int> rank_subbands(const GainTensor& g, std::span<const double> interference,
                               double noise_w);

/// Capped rate of j on its subband with and without agent n's interference,
/// evaluated on n's subband. Zero unless j shares that subband.
double externality(int j, int n, const GainTensor& g, const Allocation& alloc, double noise_w,
                   double cap_db);

/// C(n, a_n) minus the externalities n inflicts on its interfered set on a_n.
double reward(int n, const GainTensor& g, const Allocation& alloc,
              const NeighborSets& sets_next, double noise_w, double cap_db);

// ---------------------------------------------------------------------------
// Agent state construction.

/// Everything observable about one completed slot.
struct SlotSnapshot {
  GainTensor gains;
  Allocation alloc;
  std::vector<double> link_rate;
  std::vector<int> rank;               // N x M, ranks from that slot
  std::vector<double> interference;    // N x M, same-slot gains and powers
};

enum class FeatureKind : std::uint8_t {
  kPower,         // alpha p / P_max
  kRate,          // C / log2(1 + cap)
  kRank,          // (z - 1) / (M - 1)
  kDirectGain,    // dB
  kCrossGain,     // dB
  kInterference,  // dBm
};
inline constexpr int kNumFeatureKinds = 6;

inline constexpr int state_length(int c) { return 5 + 9 * c; }

/// Kind of every position in one per-subband vector.
std::vector<FeatureKind> feature_layout(int c);

struct StateContext {
  int num_subbands = 0;
  int c = 0;
  double p_max_w = 0.0;
  double sinr_cap_db = 30.0;
  const GainTensor* gains_now = nullptr;          // slot t
  std::span<const int> rank_now;                  // z at t
  std::span<const double> interference_now;       // t gains, t-1 powers
  const SlotSnapshot* prev = nullptr;             // slot t-1
  const NeighborSets* sets = nullptr;             // I^t, O^t
};

/// Per-subband feature vectors before normalization. Gains are in dB and
/// interference in dBm (floored at -174); power, rate and rank are already
/// scaled. `present[i] == 0` marks padding for missing neighbors.
struct RawState {
  int per_subband = 0;
  int num_subbands = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> present;
};

RawState build_raw_state(int n, const StateContext& ctx);

/// Affine map for the dB-valued features, fitted with running mean and
/// standard deviation until frozen.
class FeatureNormalizer {
 public:
  struct Moments {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
  };

  explicit FeatureNormalizer(int c = 5);

  void observe(const RawState& raw);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  double mean(FeatureKind kind) const;
  double stddev(FeatureKind kind) const;

  /// Normalized copy of `raw`; padded positions are exactly zero.
  std::vector<double> normalize(const RawState& raw) const;

  nlohmann::json to_json() const;
  static FeatureNormalizer from_json(const nlohmann::json& j);

 private:
  int c_;
  bool frozen_ = false;
  std::vector<FeatureKind> layout_;
  std::array<Moments, kNumFeatureKinds> moments_{};
};

/// Normalized observation of one agent: M per-subband vectors of equal length
/// stored back to back, so the top-layer state is the whole buffer.
struct AgentState {
  int per_subband = 0;
  int num_subbands = 0;
  std::shared_ptr<const std::vector<double>> top;
  std::vector<int> rank;  // z(n, m), 1-based

  std::span<const double> top_state() const { return *top; }
  std::span<const double> subband_state(int m) const {
    return std::span<const double>(*top).subspan(static_cast<std::size_t>(m) * per_subband,
                                                 per_subband);
  }
};

AgentState build_state(int n, const StateContext& ctx, const FeatureNormalizer& normalizer);

// ---------------------------------------------------------------------------

struct EnvConfig {
  int num_subbands = 1;
  int c = 5;
  double noise_w = 0.0;
  double p_max_w = 0.0;
  double sinr_cap_db = 30.0;
  double rho = 1.0;
  bool build_states = true;
};

struct StepResult {
  SlotMetrics metrics;
  std::vector<double> rewards;           // r^{t+1}
  const std::vector<AgentState>* next_states = nullptr;  // s^{t+1}, if built
};

/// Slotted downlink over one deployment. `step` scores the allocation at the
/// current slot, then advances fading and rebuilds the one-slot-delayed
/// neighbor sets and states for the next slot.
class Environment {
 public:
  Environment(EnvConfig cfg, Deployment dep, LargeScaleFading beta, std::uint64_t fading_seed,
              std::uint64_t innovation_seed,
              std::shared_ptr<FeatureNormalizer> normalizer = nullptr);

  FeatureNormalizer& normalizer() { return *normalizer_; }

  int slot() const { return slot_; }
  int num_links() const { return deployment_.num_links; }
  int num_subbands() const { return cfg_.num_subbands; }
  const EnvConfig& config() const { return cfg_; }
  const Deployment& deployment() const { return deployment_; }
  const LargeScaleFading& large_scale() const { return beta_; }

  const GainTensor& gains() const { return gains_; }
  bool has_history() const { return prev_ != nullptr; }
  const SlotSnapshot& previous() const;
  const NeighborSets& neighbor_sets() const;
  const std::vector<AgentState>& states() const;

  StepResult step(const Allocation& alloc);

 private:
  void rebuild_states();

  EnvConfig cfg_;
  Deployment deployment_;
  LargeScaleFading beta_;
  Rng innovation_rng_;
  SmallScaleFading fading_;
  GainTensor gains_;
  int slot_ = 0;
  std::unique_ptr<SlotSnapshot> prev_;
  NeighborSets sets_;
  std::vector<int> rank_now_;
  std::vector<double> interference_now_;
  std::vector<AgentState> states_;
  std::shared_ptr<FeatureNormalizer> normalizer_;
};

}  // namespace jointrl
