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

#include <optional>
#include <vector>

#include "jointrl/channel.hpp"
#include "jointrl/env.hpp"
#include "jointrl/rng.hpp"

namespace jointrl {

struct FpOptions {
  double noise_w = 0.0;
  double p_max_w = 0.0;
  double sinr_cap_db = 30.0;
  int max_iter = 500;
  double tol = 1e-3;  // relative objective change that ends the run
  bool cap_trim = true;  // pull links above the SINR cap back to it
};

struct FpState {
  std::vector<double> p;
  std::vector<int> subband;
  std::vector<double> y;          // quadratic-transform auxiliaries
  std::vector<double> gamma_aux;  // SINR auxiliaries
  double objective = 0.0;         // capped sum rate, bps/Hz
  int iterations = 0;
  std::vector<double> history;    // objective after init and each iteration
};

struct FpResult {
  Allocation alloc;
  FpState state;
};

/// Sum-rate maximization by block-coordinate ascent: closed-form
/// quadratic-transform power updates at a fixed assignment, then a
/// best-response subband sweep where a move is kept only if it raises the
/// capped sum rate. Each link moves to its own-rate maximizing subband; ties
/// (common at the cap) go to the larger sum-rate gain. Starts from full power
/// on each link's strongest direct subband. With `cap_trim`, every power
/// block ends by lowering links whose SINR exceeds the cap to exactly the cap,
/// which cannot lower any capped rate. Throws std::runtime_error on a non-finite intermediate.
FpResult fp_solve(const GainTensor& g, const FpOptions& opt);

/// Solves on the previous slot's gains; the caller applies the result to the
/// current channel.
class DelayedFp {
 public:
  explicit DelayedFp(FpOptions opt) : opt_(opt) {}

  /// Feed the gains of each slot as it ends.
  void observe(const GainTensor& g);
  /// Allocation for `slot`, computed from slot - 1. Throws at slot 0 or when
  /// slot - 1 was not observed.
  FpResult allocate(int slot) const;

 private:
  FpOptions opt_;
  std::optional<GainTensor> last_;
};

Allocation random_alloc(Rng& rng, int num_links, int num_subbands, double p_max_w);

/// Lowers each power whose SINR exceeds the cap until no link is above it.
/// Every capped rate is left unchanged or raised.
void trim_to_cap(const GainTensor& g, const std::vector<int>& subband, std::vector<double>& p,
                 double noise_w, double cap_db);

/// Objective of P1 for a given allocation.
double sum_rate(const GainTensor& g, const Allocation& alloc, double noise_w, double cap_db);

}  // namespace jointrl
