#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ridecast {

/// Bumped whenever feature names, order or semantics change. Stores and
/// models written under another version are rejected on load.
inline constexpr std::string_view kSchemaVersion = "ridecast-features/1";

enum class FeatureConfig { TopologyOnly, TopologyFitness, TopologyFitnessZones };

std::string_view to_string(FeatureConfig config);  // "topo", "topo-fit", "topo-fit-zones"
FeatureConfig parse_feature_config(std::string_view text);

/// The 27 route columns used for modelling (a subset of topology_feature_names()).
const std::vector<std::string>& model_topology_features();
/// ctl, atl, tsb, ramp_rate.
const std::vector<std::string>& fitness_features();
/// rolling_{w}d_{power|hr}_z{z}_hours for w in 7/14/30/60, 7 power and 5 HR zones.
const std::vector<std::string>& zone_features();

/// Ordered column names for a configuration; the three sets are nested.
std::vector<std::string> schema_for(FeatureConfig config);

}  // namespace ridecast
