#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridecast/athlete.hpp"
#include "ridecast/ingest.hpp"
#include "ridecast/schema.hpp"

namespace ridecast {

struct FeatureRow {
  std::string activity_id;
  Day date = 0;
  std::vector<std::optional<double>> features;  // nullopt marks a missing cell
  double target = 0.0;                          // moving time, minutes
  std::optional<bool> race;

  bool operator==(const FeatureRow&) const = default;
};

struct Dataset {
  FeatureConfig config = FeatureConfig::TopologyOnly;
  std::vector<std::string> schema;
  std::vector<FeatureRow> rows;

  std::size_t column(std::string_view name) const;
  std::vector<double> targets() const;
  /// Checks that every row matches the schema width and has a positive target.
  void validate() const;
  /// Narrow to a nested (smaller or equal) configuration.
  Dataset restrict_to(FeatureConfig narrower) const;
  /// Keep only the named columns (order as given).
  Dataset select(std::span<const std::string> names) const;
  Dataset subset(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

/// One row per activity. State features are evaluated on the activity's
/// start day with strict-past windows (unless a different builder is given).
Dataset assemble(std::span<const ActivityRecord> activities,
                 const std::map<std::string, RouteProfile>& profiles,
                 std::span<const DailyLoad> history, FeatureConfig config,
                 const StateFeatureBuilder& builder = strict_state_builder());

struct LeakageViolation {
  std::string activity_id;
  std::string feature;
  double stored = 0.0;
  double recomputed = 0.0;
};

struct LeakageReport {
  std::size_t rows_checked = 0;
  std::vector<LeakageViolation> violations;
  bool clean() const { return violations.empty(); }
};

/// Re-evaluates each row's state features after injecting a synthetic hard
/// ride on the row's own day (and one a few days later). Any change means
/// the features can see the ride they are meant to predict.
LeakageReport leakage_audit(const Dataset& dataset, std::span<const DailyLoad> history,
                            const StateFeatureBuilder& builder = strict_state_builder());

std::filesystem::path store_sidecar_path(const std::filesystem::path& store);
void write_store(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_store(const std::filesystem::path& path);

}  // namespace ridecast
