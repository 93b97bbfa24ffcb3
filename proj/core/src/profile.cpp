#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ridecast/error.hpp"
#include "ridecast/ingest.hpp"

namespace ridecast {

double haversine(const TrackPoint& a, const TrackPoint& b) {
  return haversine(a.position(), b.position());
}

RouteProfile make_profile(double step, std::vector<double> altitude,
                          std::vector<double> segment_bearing) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "resample step must be positive");
  const std::size_t n = altitude.size();
  if (n < 2) throw Error(ErrorCode::InsufficientData, "a profile needs at least two grid points");
  if (!segment_bearing.empty() && segment_bearing.size() != n - 1) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("expected {} segment bearings, got {}", n - 1, segment_bearing.size()));
  }

  RouteProfile p;
  p.step = step;
  p.distance.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.distance[i] = static_cast<double>(i) * step;
  p.gradient.resize(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    p.gradient[i] = 100.0 * (altitude[i + 1] - altitude[i]) / step;
  }
  p.gradient[n - 1] = p.gradient[n - 2];
  if (segment_bearing.empty()) segment_bearing.assign(n - 1, 0.0);
  segment_bearing.push_back(segment_bearing.back());
  p.bearing = std::move(segment_bearing);
  p.altitude = std::move(altitude);
  return p;
}

std::vector<double> rolling_mean_centered(std::span<const double> values, int window) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t half = std::max(0, window / 2);
  std::vector<double> out(values.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (std::ptrdiff_t j = i - h; j <= i + h; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(2 * h + 1);
  }
  return out;
}

std::vector<double> smooth_bearings(std::span<const double> bearings, int window) {
  constexpr double kRad = std::numbers::pi / 180.0;
  const auto n = static_cast<std::ptrdiff_t>(bearings.size());
  const std::ptrdiff_t half = std::max(0, window / 2);
  std::vector<double> out(bearings.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t h = std::min({half, i, n - 1 - i});
    double s = 0.0, c = 0.0;
    for (std::ptrdiff_t j = i - h; j <= i + h; ++j) {
      s += std::sin(bearings[j] * kRad);
      c += std::cos(bearings[j] * kRad);
    }
    double deg = std::atan2(s, c) / kRad;
    if (deg < 0.0) deg += 360.0;
    out[i] = deg >= 360.0 ? 0.0 : deg;
  }
  return out;
}

namespace {

// Linear interpolation of `ys` (sampled at non-decreasing `xs`) at `x`.
double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double span = xs[hi] - xs[lo];
  if (span <= 0.0) return ys[hi];
  const double t = (x - xs[lo]) / span;
  return ys[lo] + t * (ys[hi] - ys[lo]);
}

}  // namespace

RouteProfile resample_profile(std::span<const TrackPoint> points, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "resample step must be positive");
  if (points.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least two track points");
  }
  const std::size_t n = points.size();
  std::size_t missing = 0;
  for (const auto& p : points) missing += p.altitude.has_value() ? 0 : 1;
  const double missing_fraction = static_cast<double>(missing) / static_cast<double>(n);
  if (missing_fraction > kMaxMissingAltitudeFraction) {
    throw Error(ErrorCode::InsufficientData,
                fmt::format("{:.1f}% of points lack altitude", 100.0 * missing_fraction));
  }

  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) cumulative[i] = cumulative[i - 1] + haversine(points[i - 1], points[i]);
  const double total = cumulative.back();
  if (total < step) {
    throw Error(ErrorCode::ZeroLengthTrack, fmt::format("track length {:.3f} m is below one step", total));
  }

  // Fill altitude gaps from the nearest known neighbours along the track.
  std::vector<double> known_d, known_h;
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].altitude) {
      known_d.push_back(cumulative[i]);
      known_h.push_back(*points[i].altitude);
    }
  }
  std::vector<double> raw_alt(n), lat(n), lon(n);
  for (std::size_t i = 0; i < n; ++i) {
    raw_alt[i] = points[i].altitude ? *points[i].altitude : interpolate(known_d, known_h, cumulative[i]);
    lat[i] = points[i].latitude;
    lon[i] = points[i].longitude;
  }

  // Tolerate floating round-off so a nominal 1000 m track at 10 m keeps 101 points.
  const auto grid_n = static_cast<std::size_t>(std::floor(total / step + 1e-6)) + 1;
  std::vector<double> alt(grid_n);
  std::vector<LatLon> pos(grid_n);
  for (std::size_t k = 0; k < grid_n; ++k) {
    const double d = static_cast<double>(k) * step;
    alt[k] = interpolate(cumulative, raw_alt, d);
    pos[k] = {interpolate(cumulative, lat, d), interpolate(cumulative, lon, d)};
  }
  std::vector<double> raw_bearing(grid_n - 1);
  for (std::size_t k = 0; k + 1 < grid_n; ++k) raw_bearing[k] = initial_bearing(pos[k], pos[k + 1]);

  return make_profile(step, rolling_mean_centered(alt, kAltitudeSmoothingWindow),
                      smooth_bearings(raw_bearing, kBearingSmoothingWindow));
}

}  // namespace ridecast
