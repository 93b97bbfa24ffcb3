#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridecast/regression.hpp"
#include "ridecast/topology.hpp"

namespace ridecast {

inline constexpr std::string_view kWhatIfCaveat =
    "Associational estimate: fitness coefficients are learned from correlated observational data and may "
    "reflect confounding (fitter riders choose harder routes), not the causal effect of changing fitness.";

const std::vector<double>& default_fractions();

/// Prefix of the grid covering floor(fraction * segments) segments. Throws
/// InvalidFraction outside (0, 1] or when fewer than two points remain.
RouteProfile truncate_route(const RouteProfile& profile, double fraction);

/// Model input row from route topology plus optional named state values.
/// Throws SchemaMismatch when a model feature is neither.
std::vector<std::optional<double>> feature_row(const TrainedLinearModel& model, const TopologyFeatures& topology,
                                               const std::map<std::string, double>& state = {});

struct CheckpointPrediction {
  double fraction = 0.0;
  double distance_km = 0.0;
  double ascent_m = 0.0;
  int climbs = 0;
  double predicted_min = 0.0;
  std::optional<double> change_rate;  // min per % distance vs previous checkpoint
};

std::vector<CheckpointPrediction> progressive_predictions(const RouteProfile& profile,
                                                          const TrainedLinearModel& model,
                                                          std::span<const double> fractions);
std::string checkpoint_csv(std::span<const CheckpointPrediction> rows);

struct FitnessOverrides {
  std::optional<double> ctl;
  std::optional<double> atl;
  std::optional<double> tsb;        // defaults to ctl - atl
  std::optional<double> ramp_rate;  // defaults to 0

  std::map<std::string, double> resolve() const;
};

double whatif(const RouteProfile& profile, const TrainedLinearModel& model, const FitnessOverrides& overrides);
double whatif(const TopologyFeatures& topology, const TrainedLinearModel& model, const FitnessOverrides& overrides);

struct SweepPoint {
  double value = 0.0;
  double predicted_min = 0.0;
};

/// Vary one of ctl/atl/tsb/ramp_rate over `values`, holding the rest. When
/// ctl or atl varies and tsb was not given, tsb follows ctl - atl.
std::vector<SweepPoint> whatif_sweep(const RouteProfile& profile, const TrainedLinearModel& model,
                                     const FitnessOverrides& base, std::string_view field,
                                     std::span<const double> values);
std::string sweep_csv(std::string_view field, std::span<const SweepPoint> points);

}  // namespace ridecast
