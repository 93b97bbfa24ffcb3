#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ridecast/dates.hpp"

namespace ridecast {

inline constexpr int kPowerZones = 7;
inline constexpr int kHrZones = 5;
inline constexpr std::array<int, 4> kZoneWindows{7, 14, 30, 60};
inline constexpr double kCtlDays = 42.0;
inline constexpr double kAtlDays = 7.0;
inline constexpr int kRampDays = 7;
inline constexpr std::size_t kNpWindowS = 30;

enum class Channel { Power, HeartRate };

struct DailyLoad {
  Day date = 0;
  double tss = 0.0;
  std::array<double, kPowerZones> power_zone_seconds{};
  std::array<double, kHrZones> hr_zone_seconds{};

  bool operator==(const DailyLoad&) const = default;
};

struct FitnessState {
  Day date = 0;
  double ctl = 0.0;
  double atl = 0.0;
  double tsb = 0.0;        // ctl - atl
  double ramp_rate = 0.0;  // CTL change over the last 7 days
};

struct ZoneConfig {
  double ftp = 232.0;     // W
  double max_hr = 190.0;  // bpm
  // Lower bounds of Z1..Z6 as fractions of FTP.
  std::vector<double> power_bounds{0.55, 0.75, 0.90, 1.05, 1.20, 1.50};
  // Lower bounds of Z1..Z4 as fractions of max HR.
  std::vector<double> hr_bounds{0.60, 0.70, 0.80, 0.90};

  void validate() const;
  int power_zone(double watts) const;
  int hr_zone(double bpm) const;
};

ZoneConfig zone_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ZoneConfig& config);
ZoneConfig read_zone_config(const std::filesystem::path& path);

/// Fourth root of the mean fourth power of the 30 s rolling average.
/// Missing (NaN) samples count as zero output.
double normalized_power(std::span<const double> power);
/// (duration * NP * IF) / (FTP * 3600) * 100 with 1 Hz samples.
double compute_tss(std::span<const double> power, double ftp);

struct ZoneSeconds {
  std::array<double, kPowerZones> power{};
  std::array<double, kHrZones> hr{};
};
ZoneSeconds zone_seconds(std::span<const double> power, std::span<const double> heart_rate,
                         const ZoneConfig& config);

/// Days without a record are zero-filled. Returns one state per calendar day
/// from the first to the last record. Throws DuplicateDay.
std::vector<FitnessState> evolve_fitness(std::span<const DailyLoad> history);

/// Sort by date and reject duplicate days.
std::vector<DailyLoad> normalize_history(std::span<const DailyLoad> history);

enum class WindowBoundary {
  Strict,     // only days before t
  Inclusive,  // also day t (leaks the ride itself; for audits only)
};

/// Fitness at the start of day t, i.e. after day t-1.
FitnessState fitness_before(std::span<const DailyLoad> history, Day t,
                            WindowBoundary boundary = WindowBoundary::Strict);

/// Hours in `zone` over days t' with t - w < t' < t.
double rolling_zone_hours(std::span<const DailyLoad> history, Day t, int window_days, Channel channel,
                          int zone, WindowBoundary boundary = WindowBoundary::Strict);

using StateFeatures = std::vector<std::pair<std::string, double>>;

/// The 4 fitness and 48 zone-hour features in schema order.
StateFeatures build_state_features(std::span<const DailyLoad> history, Day t,
                                   WindowBoundary boundary = WindowBoundary::Strict);

using StateFeatureBuilder = std::function<StateFeatures(std::span<const DailyLoad>, Day)>;
StateFeatureBuilder strict_state_builder();

/// date,channel,zone,seconds rows merged into per-day loads.
std::vector<DailyLoad> read_zone_seconds_csv(const std::filesystem::path& path);
/// date,tss rows.
std::vector<DailyLoad> read_daily_tss_csv(const std::filesystem::path& path);
/// Sum loads that fall on the same day.
std::vector<DailyLoad> merge_loads(std::span<const DailyLoad> a, std::span<const DailyLoad> b);

void write_zone_seconds_csv(const std::filesystem::path& path, std::span<const DailyLoad> history);
void write_daily_tss_csv(const std::filesystem::path& path, std::span<const DailyLoad> history);

}  // namespace ridecast
