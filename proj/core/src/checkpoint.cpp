#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ridecast/checkpoint.hpp"
#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/schema.hpp"

namespace ridecast {

const std::vector<double>& default_fractions() {
  static const std::vector<double> f{0.25, 0.5, 0.75, 1.0};
  return f;
}

RouteProfile truncate_route(const RouteProfile& profile, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidFraction, fmt::format("fraction {} is outside (0, 1]", fraction));
  }
  const std::size_t segs = profile.segments();
  const auto m = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(segs) + 1e-9)) + 1;
  if (m < 2) {
    throw Error(ErrorCode::InvalidFraction, fmt::format("fraction {} leaves less than one grid step", fraction));
  }
  if (m >= profile.size()) return profile;
  RouteProfile out;
  out.step = profile.step;
  out.distance.assign(profile.distance.begin(), profile.distance.begin() + static_cast<std::ptrdiff_t>(m));
  out.altitude.assign(profile.altitude.begin(), profile.altitude.begin() + static_cast<std::ptrdiff_t>(m));
  out.gradient.assign(profile.gradient.begin(), profile.gradient.begin() + static_cast<std::ptrdiff_t>(m));
  out.bearing.assign(profile.bearing.begin(), profile.bearing.begin() + static_cast<std::ptrdiff_t>(m));
  out.gradient[m - 1] = out.gradient[m - 2];
  out.bearing[m - 1] = out.bearing[m - 2];
  return out;
}

std::vector<std::optional<double>> feature_row(const TrainedLinearModel& model, const TopologyFeatures& topology,
                                               const std::map<std::string, double>& state) {
  static const auto topo_names = topology_feature_names();
  std::vector<std::optional<double>> row;
  row.reserve(model.features.size());
  for (const auto& name : model.features) {
    if (std::find(topo_names.begin(), topo_names.end(), name) != topo_names.end()) {
      row.push_back(topology.get(name));
    } else if (auto it = state.find(name); it != state.end()) {
      row.push_back(it->second);
    } else {
      throw Error(ErrorCode::SchemaMismatch, fmt::format("no value supplied for model feature '{}'", name));
    }
  }
  return row;
}

std::vector<CheckpointPrediction> progressive_predictions(const RouteProfile& profile,
                                                          const TrainedLinearModel& model,
                                                          std::span<const double> fractions) {
  if (model.config != FeatureConfig::TopologyOnly) {
    throw Error(ErrorCode::SchemaMismatch, "checkpoint predictions need a topology-only model");
  }
  std::vector<CheckpointPrediction> out;
  double prev = 0.0;
  for (double f : fractions) {
    if (!out.empty() && !(f > prev)) throw Error(ErrorCode::InvalidFraction, "fractions must be strictly increasing");
    const RouteProfile prefix = truncate_route(profile, f);
    const TopologyFeatures topo = extract_topology(prefix);
    CheckpointPrediction cp;
    cp.fraction = f;
    cp.distance_km = prefix.total_distance() / 1000.0;
    cp.ascent_m = topo.total_ascent;
    cp.climbs = topo.num_climbs;
    cp.predicted_min = model.predict(feature_row(model, topo));
    if (!out.empty()) cp.change_rate = (cp.predicted_min - out.back().predicted_min) / ((f - prev) * 100.0);
    out.push_back(cp);
    prev = f;
  }
  return out;
}

std::string checkpoint_csv(std::span<const CheckpointPrediction> rows) {
  std::string out = "fraction,dist_km,ascent_m,climbs,predicted_min,change_rate\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{}\n", csv::format_double(r.fraction), csv::format_double(r.distance_km),
                       csv::format_double(r.ascent_m), r.climbs, csv::format_double(r.predicted_min),
                       r.change_rate ? csv::format_double(*r.change_rate) : std::string());
  }
  return out;
}

std::map<std::string, double> FitnessOverrides::resolve() const {
  if (!ctl || !atl) throw Error(ErrorCode::SchemaMismatch, "what-if needs at least ctl and atl");
  return {{"ctl", *ctl}, {"atl", *atl}, {"tsb", tsb.value_or(*ctl - *atl)}, {"ramp_rate", ramp_rate.value_or(0.0)}};
}

double whatif(const TopologyFeatures& topology, const TrainedLinearModel& model, const FitnessOverrides& overrides) {
  if (model.config != FeatureConfig::TopologyFitness) {
    throw Error(ErrorCode::SchemaMismatch,
                fmt::format("what-if needs a '{}' model, got '{}'", to_string(FeatureConfig::TopologyFitness),
                            to_string(model.config)));
  }
  return model.predict(feature_row(model, topology, overrides.resolve()));
}

double whatif(const RouteProfile& profile, const TrainedLinearModel& model, const FitnessOverrides& overrides) {
  return whatif(extract_topology(profile), model, overrides);
}

std::vector<SweepPoint> whatif_sweep(const RouteProfile& profile, const TrainedLinearModel& model,
                                     const FitnessOverrides& base, std::string_view field,
                                     std::span<const double> values) {
  const TopologyFeatures topo = extract_topology(profile);
  std::vector<SweepPoint> out;
  for (double v : values) {
    FitnessOverrides o = base;
    if (field == "ctl") {
      o.ctl = v;
    } else if (field == "atl") {
      o.atl = v;
    } else if (field == "tsb") {
      o.tsb = v;
    } else if (field == "ramp_rate") {
      o.ramp_rate = v;
    } else {
      throw Error(ErrorCode::InvalidArgument, fmt::format("cannot sweep '{}'", field));
    }
    out.push_back({v, whatif(topo, model, o)});
  }
  return out;
}

std::string sweep_csv(std::string_view field, std::span<const SweepPoint> points) {
  std::string out = fmt::format("{},predicted_min\n", field);
  for (const auto& p : points) out += fmt::format("{},{}\n", csv::format_double(p.value), csv::format_double(p.predicted_min));
  return out;
}

}  // namespace ridecast
