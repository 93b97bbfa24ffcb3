#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "ridecast/athlete.hpp"
#include "ridecast/geo.hpp"
#include "ridecast/ingest.hpp"

namespace fixture {

inline ridecast::RouteProfile from_gradients(const std::vector<double>& grads, std::vector<double> bearings = {},
                                             double step = 10.0, double start_alt = 100.0) {
  std::vector<double> alt{start_alt};
  for (double g : grads) alt.push_back(alt.back() + g * step / 100.0);
  return ridecast::make_profile(step, std::move(alt), std::move(bearings));
}

// Blocks of flat, climbing, descending and borderline terrain with short
// dips, so merging and splitting both get exercised.
template <class Rng>
std::vector<double> random_gradients(Rng& rng, std::size_t segments) {
  std::uniform_int_distribution<int> kind(0, 5);
  std::uniform_int_distribution<int> len(3, 180);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> g;
  while (g.size() < segments) {
    const int k = kind(rng);
    const auto n = static_cast<std::size_t>(k == 4 ? len(rng) % 12 + 1 : len(rng));
    for (std::size_t i = 0; i < n && g.size() < segments; ++i) {
      switch (k) {
        case 0: g.push_back(-1.5 + 3.0 * u(rng)); break;
        case 1: g.push_back(3.0 + 9.0 * u(rng)); break;
        case 2: g.push_back(-12.0 + 8.0 * u(rng)); break;
        case 3: g.push_back(2.0 + 2.5 * u(rng)); break;
        case 4: g.push_back(-2.0 + 4.5 * u(rng)); break;  // short gap
        default: g.push_back(u(rng) < 0.5 ? 3.0 : 2.9); break;
      }
    }
  }
  return g;
}

// Heading random walk with occasional sharp bends spread over a few segments.
template <class Rng>
std::vector<double> random_bearings(Rng& rng, std::size_t segments) {
  std::normal_distribution<double> wander(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> b;
  double h = 360.0 * u(rng);
  while (b.size() < segments) {
    if (u(rng) < 0.01) {
      const double turn = (u(rng) < 0.5 ? -1.0 : 1.0) * (30.0 + 120.0 * u(rng));
      const int spread = 1 + static_cast<int>(u(rng) * 4);
      for (int s = 0; s < spread && b.size() < segments; ++s) {
        h += turn / spread;
        b.push_back(std::fmod(std::fmod(h, 360.0) + 360.0, 360.0));
      }
    } else {
      h += wander(rng);
      b.push_back(std::fmod(std::fmod(h, 360.0) + 360.0, 360.0));
    }
  }
  return b;
}

template <class Rng>
ridecast::RouteProfile random_profile(Rng& rng, std::size_t max_points = 5000) {
  std::uniform_int_distribution<std::size_t> size(400, max_points);
  const std::size_t segs = size(rng) - 1;
  return from_gradients(random_gradients(rng, segs), random_bearings(rng, segs));
}

// Square circuit of the given side, starting mid-side, one point per `spacing` m.
inline std::vector<ridecast::TrackPoint> square_circuit(double side_m, double spacing_m = 10.0) {
  std::vector<ridecast::TrackPoint> pts;
  ridecast::LatLon pos{45.0, 7.0};
  const double headings[] = {0.0, 90.0, 180.0, 270.0, 0.0};
  const double lengths[] = {side_m / 2, side_m, side_m, side_m, side_m / 2};
  pts.push_back({pos.latitude, pos.longitude, 200.0, std::nullopt});
  for (int leg = 0; leg < 5; ++leg) {
    const int steps = static_cast<int>(std::lround(lengths[leg] / spacing_m));
    for (int s = 0; s < steps; ++s) {
      pos = ridecast::destination(pos, headings[leg], spacing_m);
      pts.push_back({pos.latitude, pos.longitude, 200.0, std::nullopt});
    }
  }
  return pts;
}

template <class Rng>
std::vector<ridecast::DailyLoad> random_history(Rng& rng, ridecast::Day first, int days) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ridecast::DailyLoad> out;
  for (int d = 0; d < days; ++d) {
    if (u(rng) < 0.35) continue;
    ridecast::DailyLoad l;
    l.date = first + d;
    l.tss = 20.0 + 150.0 * u(rng);
    for (auto& s : l.power_zone_seconds) s = 900.0 * u(rng);
    for (auto& s : l.hr_zone_seconds) s = 1200.0 * u(rng);
    out.push_back(l);
  }
  return out;
}

}  // namespace fixture
