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

#include "jointrl/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace jointrl {

namespace {

// Interference at every receiver on every subband, N x M.
std::vector<double> interference_table(const GainTensor& g, const std::vector<int>& subband,
                                       const std::vector<double>& p) {
  const int n_links = g.num_links;
  const int m_count = g.num_subbands;
  std::vector<double> table(static_cast<std::size_t>(n_links) * m_count, 0.0);
  for (int j = 0; j < n_links; ++j) {
    for (int l = 0; l < n_links; ++l) {
      if (l == j) continue;
      table[nm(j, subband[l], m_count)] += g(l, j, subband[l]) * p[l];
    }
  }
  return table;
}

double objective_from(const GainTensor& g, const std::vector<int>& subband,
                      const std::vector<double>& p, const std::vector<double>& interference,
                      double noise_w, double cap_db) {
  double total = 0.0;
  for (int n = 0; n < g.num_links; ++n) {
    const int m = subband[n];
    total += spectral_efficiency(
        g(n, n, m) * p[n] / (interference[nm(n, m, g.num_subbands)] + noise_w), cap_db);
  }
  return total;
}

}  // namespace

void trim_to_cap(const GainTensor& g, const std::vector<int>& subband, std::vector<double>& p,
                 double noise_w, double cap_db) {
  const double cap = std::pow(10.0, cap_db / 10.0);
  // Each pass only lowers powers, so interference and the limits shrink
  // monotonically; a handful of passes settles every practical instance.
  for (int pass = 0; pass < 4 * g.num_links + 4; ++pass) {
    const auto table = interference_table(g, subband, p);
    bool changed = false;
    for (int n = 0; n < g.num_links; ++n) {
      const int m = subband[n];
      const double direct = g(n, n, m);
      if (!(direct > 0.0)) continue;
      const double limit = cap * (table[nm(n, m, g.num_subbands)] + noise_w) / direct;
      if (p[n] > limit * (1.0 + 1e-12)) {
        p[n] = limit;
        changed = true;
      }
    }
    if (!changed) break;
  }
}

double sum_rate(const GainTensor& g, const Allocation& alloc, double noise_w, double cap_db) {
  const auto table = interference_table(g, alloc.subband, alloc.power);
  return objective_from(g, alloc.subband, alloc.power, table, noise_w, cap_db);
}

FpResult fp_solve(const GainTensor& g, const FpOptions& opt) {
  if (opt.max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(opt.noise_w > 0.0) || !(opt.p_max_w > 0.0)) {
    throw std::invalid_argument("noise and P_max must be positive");
  }
  const int n_links = g.num_links;
  const int m_count = g.num_subbands;
  const double noise = opt.noise_w;

  FpState st;
  st.p.assign(n_links, opt.p_max_w);
  st.subband.assign(n_links, 0);
  st.y.assign(n_links, 0.0);
  st.gamma_aux.assign(n_links, 0.0);
  for (int n = 0; n < n_links; ++n) {
    for (int m = 1; m < m_count; ++m) {
      if (g(n, n, m) > g(n, n, st.subband[n])) st.subband[n] = m;
    }
  }
  if (opt.cap_trim) trim_to_cap(g, st.subband, st.p, noise, opt.sinr_cap_db);
  std::vector<double> interference = interference_table(g, st.subband, st.p);
  st.objective = objective_from(g, st.subband, st.p, interference, noise, opt.sinr_cap_db);
  st.history.push_back(st.objective);

  auto check_finite = [&](double v, const char* what) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string("non-finite ") + what + " at FP iteration " +
                               std::to_string(st.iterations + 1));
    }
  };

  std::vector<double> p_new(n_links);
  for (int it = 0; it < opt.max_iter; ++it) {
    const double start = st.objective;

    // Power block: auxiliaries from the current powers, then the closed form.
    for (int n = 0; n < n_links; ++n) {
      const int m = st.subband[n];
      const double signal = g(n, n, m) * st.p[n];
      const double rest = interference[nm(n, m, m_count)] + noise;
      st.gamma_aux[n] = signal / rest;
      st.y[n] = std::sqrt((1.0 + st.gamma_aux[n]) * signal) / (rest + signal);
      check_finite(st.y[n], "auxiliary variable");
    }
    for (int n = 0; n < n_links; ++n) {
      const int m = st.subband[n];
      double denom = 0.0;
      for (int j = 0; j < n_links; ++j) {
        if (st.subband[j] == m) denom += st.y[j] * st.y[j] * g(n, j, m);
      }
      const double numer = st.y[n] * st.y[n] * (1.0 + st.gamma_aux[n]) * g(n, n, m);
      p_new[n] = denom > 0.0 ? std::min(opt.p_max_w, numer / (denom * denom)) : st.p[n];
      check_finite(p_new[n], "power");
    }
    if (opt.cap_trim) trim_to_cap(g, st.subband, p_new, noise, opt.sinr_cap_db);
    auto table_new = interference_table(g, st.subband, p_new);
    const double obj_new = objective_from(g, st.subband, p_new, table_new, noise, opt.sinr_cap_db);
    check_finite(obj_new, "objective");
    // The capped objective can dip where the closed form chases SINR above
    // the cap; such steps are rejected.
    if (obj_new >= st.objective) {
      st.p = p_new;
      interference = std::move(table_new);
      st.objective = obj_new;
    }

    // Subband block: each link in turn moves to the subband maximizing its own
    // rate, guarded by the global objective. Rates saturate at the cap, so ties
    // among own-rate maximizers are broken by the larger objective gain.
    auto subband_rate = [&](int m, const std::vector<int>& sb, const std::vector<double>& table) {
      double total = 0.0;
      for (int j = 0; j < n_links; ++j) {
        if (sb[j] != m) continue;
        total += spectral_efficiency(g(j, j, m) * st.p[j] / (table[nm(j, m, m_count)] + noise),
                                     opt.sinr_cap_db);
      }
      return total;
    };
    for (int n = 0; n < n_links; ++n) {
      const int from = st.subband[n];
      std::vector<double> own(m_count);
      double top = -1.0;
      for (int m = 0; m < m_count; ++m) {
        own[m] = spectral_efficiency(
            g(n, n, m) * st.p[n] / (interference[nm(n, m, m_count)] + noise), opt.sinr_cap_db);
        top = std::max(top, own[m]);
      }
      int best = from;
      double best_gain = 0.0;
      std::vector<double> best_table;
      for (int m = 0; m < m_count; ++m) {
        if (m == from || own[m] < top * (1.0 - 1e-12)) continue;
        const double before = subband_rate(from, st.subband, interference) +
                              subband_rate(m, st.subband, interference);
        std::vector<double> moved = interference;
        for (int j = 0; j < n_links; ++j) {
          if (j == n) continue;
          moved[nm(j, from, m_count)] -= g(n, j, from) * st.p[n];
          moved[nm(j, m, m_count)] += g(n, j, m) * st.p[n];
        }
        std::vector<int> sb = st.subband;
        sb[n] = m;
        const double gain = subband_rate(from, sb, moved) + subband_rate(m, sb, moved) - before;
        if (gain > best_gain) {
          best_gain = gain;
          best = m;
          best_table = std::move(moved);
        }
      }
      if (best != from) {
        st.subband[n] = best;
        interference = std::move(best_table);
      }
    }
    // Fresh table and objective to keep drift out of the running sums.
    interference = interference_table(g, st.subband, st.p);
    st.objective = objective_from(g, st.subband, st.p, interference, noise, opt.sinr_cap_db);
    check_finite(st.objective, "objective");
    st.history.push_back(st.objective);
    st.iterations = it + 1;

    const double change = std::abs(st.objective - start) / std::max(std::abs(start), 1e-12);
    if (change < opt.tol) break;
  }

  FpResult out;
  out.alloc.subband = st.subband;
  out.alloc.power = st.p;
  out.state = std::move(st);
  return out;
}

void DelayedFp::observe(const GainTensor& g) { last_ = g; }

FpResult DelayedFp::allocate(int slot) const {
  if (slot < 1) throw std::logic_error("delayed FP has no decision for slot 0");
  if (!last_ || last_->slot != slot - 1) {
    throw std::logic_error("delayed FP needs the gains of slot " + std::to_string(slot - 1));
  }
  return fp_solve(*last_, opt_);
}

Allocation random_alloc(Rng& rng, int num_links, int num_subbands, double p_max_w) {
  std::uniform_int_distribution<int> pick(0, num_subbands - 1);
  std::uniform_real_distribution<double> power(0.0, p_max_w);
  Allocation alloc;
  alloc.subband.resize(num_links);
  alloc.power.resize(num_links);
  for (int n = 0; n < num_links; ++n) {
    alloc.subband[n] = pick(rng);
    alloc.power[n] = power(rng);
  }
  return alloc;
}

}  // namespace jointrl
