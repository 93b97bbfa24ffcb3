#include "ridecast/schema.hpp"

#include <fmt/format.h>

#include "ridecast/athlete.hpp"
#include "ridecast/error.hpp"

namespace ridecast {

std::string_view to_string(FeatureConfig config) {
  switch (config) {
    case FeatureConfig::TopologyOnly: return "topo";
    case FeatureConfig::TopologyFitness: return "topo-fit";
    case FeatureConfig::TopologyFitnessZones: return "topo-fit-zones";
  }
  return "topo";
}

FeatureConfig parse_feature_config(std::string_view text) {
  if (text == "topo") return FeatureConfig::TopologyOnly;
  if (text == "topo-fit") return FeatureConfig::TopologyFitness;
  if (text == "topo-fit-zones") return FeatureConfig::TopologyFitnessZones;
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown feature config '{}'", text));
}

const std::vector<std::string>& model_topology_features() {
  // Extracted but not modelled: total_descent, elevation_min, elevation_max,
  // num_uncategorized, total_tdf_score, total_climb_length, avg_climb_length,
  // pct_slope_negative, pct_slope_10_plus, pct_above_8, climb_density,
  // turn_density, longest_climb_distance, max_sustained_gradient_location and
  // the ascent-by-third fractions. See README "Feature schema".
  static const std::vector<std::string> names = {
      "total_distance",      "total_ascent",        "elevation_avg",     "elevation_gain_per_km",
      "punchiness_score",    "gradient_std",        "gradient_cv",       "num_climbs",
      "num_hc",              "num_cat1",            "num_cat2",          "num_cat3",
      "num_cat4",            "total_climb_score",   "max_climb_score",   "avg_climb_gradient",
      "max_climb_length",    "pct_slope_0_2",       "pct_slope_2_4",     "pct_slope_4_6",
      "pct_slope_6_10",      "pct_above_5",         "pct_above_10",      "num_sharp_turns",
      "recovery_distance",   "technical_descent",   "max_sustained_gradient",
  };
  return names;
}

const std::vector<std::string>& fitness_features() {
  static const std::vector<std::string> names = {"ctl", "atl", "tsb", "ramp_rate"};
  return names;
}

const std::vector<std::string>& zone_features() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const char* channel : {"power", "hr"}) {
      const int zones = std::string_view(channel) == "power" ? kPowerZones : kHrZones;
      for (int w : kZoneWindows) {
        for (int z = 0; z < zones; ++z) out.push_back(fmt::format("rolling_{}d_{}_z{}_hours", w, channel, z));
      }
    }
    return out;
  }();
  return names;
}

std::vector<std::string> schema_for(FeatureConfig config) {
  std::vector<std::string> out = model_topology_features();
  if (config == FeatureConfig::TopologyOnly) return out;
  out.insert(out.end(), fitness_features().begin(), fitness_features().end());
  if (config == FeatureConfig::TopologyFitness) return out;
  out.insert(out.end(), zone_features().begin(), zone_features().end());
  return out;
}

}  // namespace ridecast
