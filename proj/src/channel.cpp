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

#include "jointrl/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace jointrl {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<Point> hex_layout(int num_cells, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("cell radius must be positive");
  const double pitch = std::sqrt(3.0) * radius;  // center-to-center spacing
  std::vector<Point> centers;
  if (num_cells >= 1 && num_cells <= 7) {
    centers.push_back({0.0, 0.0});
    for (int k = 0; k < num_cells - 1; ++k) {
      const double angle = std::numbers::pi / 6.0 + k * std::numbers::pi / 3.0;
      centers.push_back({pitch * std::cos(angle), pitch * std::sin(angle)});
    }
    return centers;
  }
  if (num_cells == 10) {
    // Flat-top columns 1.5 R apart, odd columns shifted up by half a pitch.
    for (int row = 0; row < 2; ++row) {
      for (int col = 0; col < 5; ++col) {
        const double x = 1.5 * radius * col;
        const double y = pitch * row + (col % 2 == 1 ? 0.5 * pitch : 0.0);
        centers.push_back({x, y});
      }
    }
    return centers;
  }
  throw std::invalid_argument("unsupported cell count " +
                              std::to_string(num_cells) +
                              " (supported: 1..7, 10)");
}

bool inside_hexagon(Point p, Point center, double radius) {
  const double dx = std::abs(p.x - center.x);
  const double dy = std::abs(p.y - center.y);
  const double half_height = std::sqrt(3.0) / 2.0 * radius;
  return dy <= half_height && std::sqrt(3.0) * dx + dy <= std::sqrt(3.0) * radius;
}

Deployment generate_deployment(int num_cells, int num_links,
                               double cell_radius_m, std::uint64_t seed,
                               double min_distance_m) {
  if (num_cells <= 0 || num_links <= 0 || num_links % num_cells != 0) {
    throw std::invalid_argument("link count " + std::to_string(num_links) +
                                " is not divisible by cell count " +
                                std::to_string(num_cells));
  }
  if (min_distance_m >= std::sqrt(3.0) / 2.0 * cell_radius_m) {
    throw std::invalid_argument("minimum distance exceeds the cell inradius");
  }
  Deployment dep;
  dep.num_cells = num_cells;
  dep.num_links = num_links;
  dep.cell_radius_m = cell_radius_m;
  dep.cell_centers = hex_layout(num_cells, cell_radius_m);

  Rng rng(seed);
  std::uniform_real_distribution<double> ux(-cell_radius_m, cell_radius_m);
  const double half_height = std::sqrt(3.0) / 2.0 * cell_radius_m;
  std::uniform_real_distribution<double> uy(-half_height, half_height);

  const int per_cell = num_links / num_cells;
  for (int cell = 0; cell < num_cells; ++cell) {
    const Point c = dep.cell_centers[cell];
    for (int k = 0; k < per_cell; ++k) {
      Point rx;
      do {
        rx = {c.x + ux(rng), c.y + uy(rng)};
      } while (!inside_hexagon(rx, c, cell_radius_m) ||
               distance(rx, c) < min_distance_m);
      dep.tx_positions.push_back(c);
      dep.rx_positions.push_back(rx);
      dep.cell_of_link.push_back(cell);
    }
  }
  return dep;
}

double pathloss_db(double d_km) {
  if (!(d_km > 0.0)) throw std::invalid_argument("distance must be positive");
  return 128.1 + 37.6 * std::log10(d_km);
}

LargeScaleFading sample_large_scale(const Deployment& dep,
                                    double shadow_std_db, std::uint64_t seed) {
  if (shadow_std_db < 0.0) {
    throw std::invalid_argument("shadowing std must be nonnegative");
  }
  const int n = dep.num_links;
  LargeScaleFading out;
  out.num_links = n;
  out.beta.resize(static_cast<std::size_t>(n) * n);
  Rng rng(seed);
  std::normal_distribution<double> shadow(0.0, 1.0);
  for (int tx = 0; tx < n; ++tx) {
    for (int rx = 0; rx < n; ++rx) {
      const double d_km = distance(dep.tx_positions[tx], dep.rx_positions[rx]) / 1000.0;
      const double loss_db = pathloss_db(d_km) + shadow_std_db * shadow(rng);
      out.beta[static_cast<std::size_t>(tx) * n + rx] = std::pow(10.0, -loss_db / 10.0);
    }
  }
  return out;
}

double bessel_j0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 20; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
  }
  return sum;
}

double jakes_rho(double doppler_hz, double slot_s) {
  if (doppler_hz < 0.0 || !(slot_s > 0.0)) {
    throw std::invalid_argument("need f_d >= 0 and T > 0");
  }
  return bessel_j0(2.0 * std::numbers::pi * doppler_hz * slot_s);
}

SmallScaleFading::SmallScaleFading(int num_links, int num_subbands, double rho)
    : num_links_(num_links), num_subbands_(num_subbands), rho_(rho),
      h_(static_cast<std::size_t>(num_links) * num_links * num_subbands) {}

SmallScaleFading init_fading(int num_links, int num_subbands, double rho,
                             Rng& rng) {
  SmallScaleFading h(num_links, num_subbands, rho);
  for (auto& v : h.values()) v = complex_gaussian(rng);
  return h;
}

SmallScaleFading evolve_fading(const SmallScaleFading& h, Rng& rng) {
  SmallScaleFading next = h;
  const double rho = h.rho();
  const double w = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (auto& v : next.values()) {
    // Draw innovations even when w == 0 so the stream stays aligned.
    const std::complex<double> e = complex_gaussian(rng);
    v = rho * v + w * e;
  }
  return next;
}

GainTensor gains(const LargeScaleFading& beta, const SmallScaleFading& h,
                 int slot) {
  if (beta.num_links != h.num_links()) {
    throw std::invalid_argument("gain shape mismatch: beta has " +
                                std::to_string(beta.num_links) +
                                " links, fading has " +
                                std::to_string(h.num_links()));
  }
  const int n = h.num_links();
  const int m_count = h.num_subbands();
  GainTensor out(n, m_count, slot);
  for (int m = 0; m < m_count; ++m) {
    for (int rx = 0; rx < n; ++rx) {
      for (int tx = 0; tx < n; ++tx) {
        out(tx, rx, m) = beta(tx, rx) * std::norm(h.at(tx, rx, m));
      }
    }
  }
  return out;
}

nlohmann::json deployment_to_json(const Deployment& dep,
                                  const LargeScaleFading& beta) {
  nlohmann::json j;
  j["num_cells"] = dep.num_cells;
  j["num_links"] = dep.num_links;
  j["cell_radius_m"] = dep.cell_radius_m;
  auto points = [](const std::vector<Point>& ps) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : ps) arr.push_back({p.x, p.y});
    return arr;
  };
  j["cell_centers_m"] = points(dep.cell_centers);
  j["tx_positions_m"] = points(dep.tx_positions);
  j["rx_positions_m"] = points(dep.rx_positions);
  j["cell_of_link"] = dep.cell_of_link;
  std::vector<double> db(beta.beta.size());
  for (std::size_t i = 0; i < db.size(); ++i) db[i] = 10.0 * std::log10(beta.beta[i]);
  j["beta_db"] = db;
  return j;
}

void deployment_from_json(const nlohmann::json& j, Deployment& dep,
                          LargeScaleFading& beta) {
  auto points = [](const nlohmann::json& arr) {
    std::vector<Point> ps;
    for (const auto& p : arr) ps.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return ps;
  };
  dep.num_cells = j.at("num_cells").get<int>();
  dep.num_links = j.at("num_links").get<int>();
  dep.cell_radius_m = j.at("cell_radius_m").get<double>();
  dep.cell_centers = points(j.at("cell_centers_m"));
  dep.tx_positions = points(j.at("tx_positions_m"));
  dep.rx_positions = points(j.at("rx_positions_m"));
  dep.cell_of_link = j.at("cell_of_link").get<std::vector<int>>();
  const auto db = j.at("beta_db").get<std::vector<double>>();
  if (db.size() != static_cast<std::size_t>(dep.num_links) * dep.num_links) {
    throw std::invalid_argument("beta_db has wrong size");
  }
  beta.num_links = dep.num_links;
  beta.beta.resize(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) beta.beta[i] = std::pow(10.0, db[i] / 10.0);
}

}  // namespace jointrl
