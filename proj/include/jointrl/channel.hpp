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

#include <complex>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "jointrl/rng.hpp"

namespace jointrl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

/// Cell and link geometry of one network realization. Coordinates are in
/// meters; transmitter n sits at the center of the cell that contains
/// receiver n.
struct Deployment {
  int num_cells = 0;
  int num_links = 0;
  double cell_radius_m = 0.0;
  std::vector<Point> cell_centers;
  std::vector<Point> tx_positions;
  std::vector<Point> rx_positions;
  std::vector<int> cell_of_link;
};

/// Centers of a compact flat-top hexagonal tiling with circumradius
/// `radius`. K in 1..7 is the center cell plus the first K-1 neighbors taken
/// counter-clockwise from 30 degrees; K = 10 is two offset rows of five.
std::vector<Point> hex_layout(int num_cells, double radius);

bool inside_hexagon(Point p, Point center, double radius);

/// Receivers are drawn uniformly inside their cell's hexagon by rejection
/// sampling, at least `min_distance_m` from the cell center.
Deployment generate_deployment(int num_cells, int num_links,
                               double cell_radius_m, std::uint64_t seed,
                               double min_distance_m = 10.0);

/// Distance-dependent path loss in dB, `d_km` in kilometers.
double pathloss_db(double d_km);

/// Linear large-scale gains. Entry (tx, rx) is the gain from transmitter tx
/// to receiver rx; identical on every subband and slot.
struct LargeScaleFading {
  int num_links = 0;
  std::vector<double> beta;

  double operator()(int tx, int rx) const {
    return beta[static_cast<std::size_t>(tx) * num_links + rx];
  }
};

LargeScaleFading sample_large_scale(const Deployment& dep,
                                    double shadow_std_db, std::uint64_t seed);

/// Zeroth-order Bessel function of the first kind, alternating power series
/// truncated at k = 20. Accurate on |x| <= 12.
double bessel_j0(double x);

/// Lag-one correlation of the Gauss-Markov fading process.
double jakes_rho(double doppler_hz, double slot_s);

class SmallScaleFading {
 public:
  SmallScaleFading() = default;
  SmallScaleFading(int num_links, int num_subbands, double rho);

  int num_links() const { return num_links_; }
  int num_subbands() const { return num_subbands_; }
  double rho() const { return rho_; }

  std::complex<double>& at(int tx, int rx, int m) { return h_[index(tx, rx, m)]; }
  const std::complex<double>& at(int tx, int rx, int m) const {
    return h_[index(tx, rx, m)];
  }

  std::vector<std::complex<double>>& values() { return h_; }
  const std::vector<std::complex<double>>& values() const { return h_; }

 private:
  std::size_t index(int tx, int rx, int m) const {
    return (static_cast<std::size_t>(m) * num_links_ + rx) * num_links_ + tx;
  }

  int num_links_ = 0;
  int num_subbands_ = 0;
  double rho_ = 1.0;
  std::vector<std::complex<double>> h_;
};

/// i.i.d. unit-variance complex Gaussian initial state.
SmallScaleFading init_fading(int num_links, int num_subbands, double rho,
                             Rng& rng);

/// One slot of h <- rho h + sqrt(1 - rho^2) e with fresh innovations e.
SmallScaleFading evolve_fading(const SmallScaleFading& h, Rng& rng);

/// Per-slot gain tensor g(tx, rx, m) = beta(tx, rx) |h(tx, rx, m)|^2.
struct GainTensor {
  int num_links = 0;
  int num_subbands = 0;
  int slot = 0;
  std::vector<double> g;

  GainTensor() = default;
  GainTensor(int n, int m, int t = 0)
      : num_links(n), num_subbands(m), slot(t),
        g(static_cast<std::size_t>(n) * n * m, 0.0) {}

  double& operator()(int tx, int rx, int m) { return g[index(tx, rx, m)]; }
  double operator()(int tx, int rx, int m) const { return g[index(tx, rx, m)]; }

  std::size_t index(int tx, int rx, int m) const {
    return (static_cast<std::size_t>(m) * num_links + rx) * num_links + tx;
  }
};

GainTensor gains(const LargeScaleFading& beta, const SmallScaleFading& h,
                 int slot = 0);

/// Deployment dump: coordinates in meters, large-scale gains in dB.
nlohmann::json deployment_to_json(const Deployment& dep,
                                  const LargeScaleFading& beta);
void deployment_from_json(const nlohmann::json& j, Deployment& dep,
                          LargeScaleFading& beta);

}  // namespace jointrl
