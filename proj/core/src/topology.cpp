#include "ridecast/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ridecast/error.hpp"

namespace ridecast {

std::string_view to_string(ClimbCategory c) {
  switch (c) {
    case ClimbCategory::HC: return "HC";
    case ClimbCategory::Cat1: return "Cat1";
    case ClimbCategory::Cat2: return "Cat2";
    case ClimbCategory::Cat3: return "Cat3";
    case ClimbCategory::Cat4: return "Cat4";
    case ClimbCategory::Uncategorized: return "Uncategorized";
  }
  return "Uncategorized";
}

ClimbScore score_and_categorize(double length_m, double gradient_pct) {
  if (!(length_m > 0.0) || !(gradient_pct > 0.0)) {
    throw Error(ErrorCode::NonPositiveInput,
                fmt::format("climb length {} and gradient {} must be positive", length_m, gradient_pct));
  }
  ClimbScore s;
  s.score = length_m * gradient_pct;
  if (s.score >= 80'000.0) {
    s.category = ClimbCategory::HC;
  } else if (s.score >= 64'000.0) {
    s.category = ClimbCategory::Cat1;
  } else if (s.score >= 32'000.0) {
    s.category = ClimbCategory::Cat2;
  } else if (s.score >= 16'000.0) {
    s.category = ClimbCategory::Cat3;
  } else if (s.score >= 8'000.0) {
    s.category = ClimbCategory::Cat4;
  }
  return s;
}

namespace {

struct Run {
  std::size_t begin;
  std::size_t end;  // exclusive, segment indices
};

double mean_gradient(const RouteProfile& p, Run r) {
  double sum = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) sum += p.gradient[i];
  return sum / static_cast<double>(r.end - r.begin);
}

std::optional<Climb> make_climb(const RouteProfile& p, Run r) {
  const double length = static_cast<double>(r.end - r.begin) * p.step;
  const double g = mean_gradient(p, r);
  if (length < kClimbMinLength || g < kClimbMinGradient) return std::nullopt;
  const auto scored = score_and_categorize(length, g);
  if (scored.score <= kClimbMinScore) return std::nullopt;
  Climb c;
  c.first_segment = r.begin;
  c.end_segment = r.end;
  c.start_m = p.distance[r.begin];
  c.end_m = p.distance[r.end];
  c.length = length;
  c.avg_gradient = g;
  c.score = scored.score;
  c.tdf_score = g * g * length;
  c.category = scored.category;
  return c;
}

}  // namespace

std::vector<Climb> detect_climbs(const RouteProfile& profile) {
  const std::size_t segs = profile.segments();
  std::vector<Run> runs;
  for (std::size_t i = 0; i < segs;) {
    if (profile.gradient[i] < kClimbMinGradient) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < segs && profile.gradient[j] >= kClimbMinGradient) ++j;
    runs.push_back({i, j});
    i = j;
  }

  std::vector<Climb> climbs;
  for (std::size_t k = 0; k < runs.size();) {
    std::size_t last = k;
    while (last + 1 < runs.size() &&
           static_cast<double>(runs[last + 1].begin - runs[last].end) * profile.step < kClimbMergeGap) {
      ++last;
    }
    const Run group{runs[k].begin, runs[last].end};
    if (last == k || mean_gradient(profile, group) >= kClimbMinGradient) {
      if (auto c = make_climb(profile, group)) climbs.push_back(*c);
    } else {
      for (std::size_t r = k; r <= last; ++r) {
        if (auto c = make_climb(profile, runs[r])) climbs.push_back(*c);
      }
    }
    k = last + 1;
  }
  return climbs;
}

double punchiness(std::span<const double> gradients) {
  if (gradients.size() < 2) throw Error(ErrorCode::InsufficientData, "punchiness needs two gradients");
  const std::size_t m = gradients.size() - 1;
  double mean = 0.0;
  for (std::size_t t = 0; t < m; ++t) mean += std::fabs(gradients[t + 1] - gradients[t]);
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const double d = std::fabs(gradients[t + 1] - gradients[t]) - mean;
    var += d * d;
  }
  return std::sqrt(var / static_cast<double>(m));
}

double punchiness(const RouteProfile& profile) {
  if (profile.size() < 3) throw Error(ErrorCode::InsufficientData, "punchiness needs at least three grid points");
  return punchiness(std::span<const double>(profile.gradient).first(profile.segments()));
}

GradientDistribution gradient_distribution(const RouteProfile& profile) {
  GradientDistribution out;
  const std::size_t segs = profile.segments();
  if (segs == 0) return out;
  std::array<std::size_t, kBucketCount> counts{};
  std::size_t a5 = 0, a8 = 0, a10 = 0;
  for (std::size_t i = 0; i < segs; ++i) {
    const double g = profile.gradient[i];
    std::size_t b = kBucket10Plus;
    if (g < 0.0) {
      b = kBucketNegative;
    } else if (g < 2.0) {
      b = kBucket0To2;
    } else if (g < 4.0) {
      b = kBucket2To4;
    } else if (g < 6.0) {
      b = kBucket4To6;
    } else if (g < 10.0) {
      b = kBucket6To10;
    }
    ++counts[b];
    a5 += g > 5.0;
    a8 += g > 8.0;
    a10 += g > 10.0;
  }
  const double n = static_cast<double>(segs);
  for (std::size_t b = 0; b < kBucketCount; ++b) out.buckets[b] = static_cast<double>(counts[b]) / n;
  out.above_5 = static_cast<double>(a5) / n;
  out.above_8 = static_cast<double>(a8) / n;
  out.above_10 = static_cast<double>(a10) / n;
  return out;
}

double recovery_distance(const RouteProfile& profile, std::span<const Climb> climbs) {
  const std::size_t segs = profile.segments();
  const auto window = static_cast<std::size_t>(std::llround(kRecoveryWindow / profile.step));
  std::vector<bool> in_window(segs, false);
  for (const auto& c : climbs) {
    if (!(c.avg_gradient > kClimbMinGradient)) continue;
    const std::size_t stop = std::min(segs, c.end_segment + window);
    for (std::size_t i = c.end_segment; i < stop; ++i) in_window[i] = true;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < segs; ++i) {
    if (in_window[i] && std::fabs(profile.gradient[i]) < kRecoveryMaxGradient) total += profile.step;
  }
  return total;
}

std::vector<double> bearing_changes(const RouteProfile& profile) {
  const std::size_t n = profile.size();
  std::vector<double> out(n, 0.0);
  const std::size_t lag = static_cast<std::size_t>(kBearingSmoothingWindow);
  const std::size_t half = lag / 2;
  // bearing[i + half] averages segments i..i+lag-1, bearing[i - half - 1]
  // averages segments i-lag..i-1; both must be full windows.
  if (n < 2 * lag + 2) return out;
  const std::size_t last_segment = n - 2;
  for (std::size_t i = lag; i + lag - 1 <= last_segment; ++i) {
    out[i] = bearing_difference(profile.bearing[i - half - 1], profile.bearing[i + half]);
  }
  return out;
}

double technical_descent(const RouteProfile& profile) {
  const auto dtheta = bearing_changes(profile);
  double total = 0.0;
  for (std::size_t i = 0; i < profile.segments(); ++i) {
    if (profile.gradient[i] < kTechnicalGradient && dtheta[i] > kSharpTurnDeg) total += profile.step;
  }
  return total;
}

TurnStats sharp_turns(const RouteProfile& profile) {
  const auto dtheta = bearing_changes(profile);
  TurnStats out;
  bool in_turn = false;
  for (double d : dtheta) {
    const bool sharp = d > kSharpTurnDeg;
    if (sharp && !in_turn) ++out.count;
    in_turn = sharp;
  }
  const double km = profile.total_distance() / 1000.0;
  out.density = km > 0.0 ? out.count / km : 0.0;
  return out;
}

SustainedGradient max_sustained_gradient(const RouteProfile& profile, double window) {
  if (!(window > 0.0)) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  const auto w = static_cast<std::size_t>(std::llround(window / profile.step));
  if (w == 0 || profile.total_distance() + 1e-9 < window || w > profile.segments()) {
    throw Error(ErrorCode::RouteTooShort,
                fmt::format("route of {:.0f} m is shorter than the {:.0f} m window", profile.total_distance(), window));
  }
  const std::size_t starts = profile.segments() - w + 1;
  std::vector<double> means(starts);
  for (std::size_t s = 0; s < starts; ++s) {
    means[s] = 100.0 * (profile.altitude[s + w] - profile.altitude[s]) / (static_cast<double>(w) * profile.step);
  }
  const double best = *std::max_element(means.begin(), means.end());
  const auto tol = 1e-9 * std::max(1.0, std::fabs(best));
  for (std::size_t s = 0; s < starts; ++s) {
    if (means[s] >= best - tol) return {means[s], profile.distance[s]};
  }
  return {best, 0.0};
}

const std::vector<std::string>& topology_feature_names() {
  static const std::vector<std::string> names = [] {
    TopologyFeatures f;
    std::vector<std::string> out;
    for (auto& [k, v] : f.to_map()) out.push_back(k);
    return out;
  }();
  return names;
}

std::vector<std::pair<std::string, std::optional<double>>> TopologyFeatures::to_map() const {
  std::vector<std::pair<std::string, std::optional<double>>> m;
  m.reserve(48);
  auto put = [&m](const char* k, std::optional<double> v) { m.emplace_back(k, v); };
  put("total_distance", total_distance);
  put("total_ascent", total_ascent);
  put("total_descent", total_descent);
  put("elevation_min", elevation_min);
  put("elevation_max", elevation_max);
  put("elevation_avg", elevation_avg);
  put("elevation_gain_per_km", elevation_gain_per_km);
  put("punchiness_score", punchiness_score);
  put("gradient_std", gradient_std);
  put("gradient_cv", gradient_cv);
  put("num_climbs", num_climbs);
  put("num_hc", num_hc);
  put("num_cat1", num_cat1);
  put("num_cat2", num_cat2);
  put("num_cat3", num_cat3);
  put("num_cat4", num_cat4);
  put("num_uncategorized", num_uncategorized);
  put("total_climb_score", total_climb_score);
  put("max_climb_score", max_climb_score);
  put("total_tdf_score", total_tdf_score);
  put("climb_density", climb_density);
  put("avg_climb_gradient", avg_climb_gradient);
  put("avg_climb_length", avg_climb_length);
  put("max_climb_length", max_climb_length);
  put("total_climb_length", total_climb_length);
  put("pct_slope_negative", distribution.buckets[kBucketNegative]);
  put("pct_slope_0_2", distribution.buckets[kBucket0To2]);
  put("pct_slope_2_4", distribution.buckets[kBucket2To4]);
  put("pct_slope_4_6", distribution.buckets[kBucket4To6]);
  put("pct_slope_6_10", distribution.buckets[kBucket6To10]);
  put("pct_slope_10_plus", distribution.buckets[kBucket10Plus]);
  put("pct_above_5", distribution.above_5);
  put("pct_above_8", distribution.above_8);
  put("pct_above_10", distribution.above_10);
  put("num_sharp_turns", num_sharp_turns);
  put("turn_density", turn_density);
  put("recovery_distance", recovery_distance);
  put("technical_descent", technical_descent);
  put("max_sustained_gradient", max_sustained_gradient);
  put("max_sustained_gradient_location", max_sustained_gradient_location);
  put("longest_climb_distance", longest_climb_distance);
  put("ascent_first_third", ascent_by_third[0]);
  put("ascent_middle_third", ascent_by_third[1]);
  put("ascent_final_third", ascent_by_third[2]);
  return m;
}

std::optional<double> TopologyFeatures::get(std::string_view name) const {
  for (auto& [k, v] : to_map()) {
    if (k == name) return v;
  }
  throw Error(ErrorCode::SchemaMismatch, fmt::format("unknown topology feature '{}'", name));
}

TopologyFeatures extract_topology(const RouteProfile& profile) {
  if (profile.size() < 3) throw Error(ErrorCode::InsufficientData, "profile needs at least three grid points");
  TopologyFeatures f;
  const std::size_t n = profile.size();
  const std::size_t segs = profile.segments();
  const double km = profile.total_distance() / 1000.0;
  f.total_distance = km;

  std::array<double, 3> thirds{};
  for (std::size_t i = 0; i < segs; ++i) {
    const double dh = profile.altitude[i + 1] - profile.altitude[i];
    if (dh > 0.0) {
      f.total_ascent += dh;
      const double mid = (static_cast<double>(i) + 0.5) * profile.step;
      const auto third = std::min<std::size_t>(2, static_cast<std::size_t>(3.0 * mid / profile.total_distance()));
      thirds[third] += dh;
    } else {
      f.total_descent -= dh;
    }
  }
  if (f.total_ascent > 0.0) {
    for (std::size_t k = 0; k < 3; ++k) f.ascent_by_third[k] = thirds[k] / f.total_ascent;
  }
  const auto [lo, hi] = std::minmax_element(profile.altitude.begin(), profile.altitude.end());
  f.elevation_min = *lo;
  f.elevation_max = *hi;
  f.elevation_avg = std::accumulate(profile.altitude.begin(), profile.altitude.end(), 0.0) / static_cast<double>(n);
  f.elevation_gain_per_km = f.total_ascent / km;

  f.punchiness_score = punchiness(profile);
  double mean_g = 0.0;
  for (std::size_t i = 0; i < segs; ++i) mean_g += profile.gradient[i];
  mean_g /= static_cast<double>(segs);
  double var_g = 0.0;
  for (std::size_t i = 0; i < segs; ++i) var_g += (profile.gradient[i] - mean_g) * (profile.gradient[i] - mean_g);
  f.gradient_std = std::sqrt(var_g / static_cast<double>(segs));
  if (std::fabs(mean_g) >= 1e-9) f.gradient_cv = f.gradient_std / std::fabs(mean_g);

  f.climbs = detect_climbs(profile);
  f.num_climbs = static_cast<int>(f.climbs.size());
  double weighted_gradient = 0.0;
  for (const auto& c : f.climbs) {
    switch (c.category) {
      case ClimbCategory::HC: ++f.num_hc; break;
      case ClimbCategory::Cat1: ++f.num_cat1; break;
      case ClimbCategory::Cat2: ++f.num_cat2; break;
      case ClimbCategory::Cat3: ++f.num_cat3; break;
      case ClimbCategory::Cat4: ++f.num_cat4; break;
      case ClimbCategory::Uncategorized: ++f.num_uncategorized; break;
    }
    f.total_climb_score += c.score;
    f.max_climb_score = std::max(f.max_climb_score, c.score);
    f.total_tdf_score += c.tdf_score;
    f.total_climb_length += c.length;
    f.max_climb_length = std::max(f.max_climb_length, c.length);
    weighted_gradient += c.avg_gradient * c.length;
  }
  f.climb_density = f.num_climbs / km;
  if (f.num_climbs > 0) {
    f.avg_climb_gradient = weighted_gradient / f.total_climb_length;
    f.avg_climb_length = f.total_climb_length / f.num_climbs;
  }
  f.longest_climb_distance = f.max_climb_length;

  f.distribution = gradient_distribution(profile);
  const auto turns = sharp_turns(profile);
  f.num_sharp_turns = turns.count;
  f.turn_density = turns.density;
  f.recovery_distance = recovery_distance(profile, f.climbs);
  f.technical_descent = technical_descent(profile);
  const auto sustained = max_sustained_gradient(profile);
  f.max_sustained_gradient = sustained.gradient;
  f.max_sustained_gradient_location = sustained.location_m;
  return f;
}

}  // namespace ridecast
