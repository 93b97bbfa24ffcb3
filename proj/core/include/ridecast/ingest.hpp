#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridecast/dates.hpp"
#include "ridecast/geo.hpp"

namespace ridecast {

inline constexpr double kResampleStepM = 10.0;
inline constexpr int kAltitudeSmoothingWindow = 5;
inline constexpr int kBearingSmoothingWindow = 5;
inline constexpr double kMaxMissingAltitudeFraction = 0.10;
inline constexpr double kMovingThresholdMps = 0.5;

struct TrackPoint {
  double latitude = 0.0;
  double longitude = 0.0;
  std::optional<double> altitude;
  std::optional<std::int64_t> timestamp;  // UTC seconds

  LatLon position() const { return {latitude, longitude}; }
};

double haversine(const TrackPoint& a, const TrackPoint& b);

// Uniformly resampled route. Series are indexed by grid point; gradient[i]
// and bearing[i] describe the segment from point i to i+1, and the final
// element repeats the last segment so every series has the same length.
// Distance-weighted features therefore sum over segments 0..size()-2.
struct RouteProfile {
  double step = kResampleStepM;
  std::vector<double> distance;  // m, distance[i] == i * step
  std::vector<double> altitude;  // m
  std::vector<double> gradient;  // percent
  std::vector<double> bearing;   // degrees [0, 360), smoothed

  std::size_t size() const { return distance.size(); }
  std::size_t segments() const { return distance.empty() ? 0 : distance.size() - 1; }
  double total_distance() const { return distance.empty() ? 0.0 : distance.back(); }

  bool operator==(const RouteProfile&) const = default;
};

/// Build a profile from altitudes already on a uniform grid. No smoothing is
/// applied. `segment_bearing` holds size()-1 bearings, or is empty (all zero).
RouteProfile make_profile(double step, std::vector<double> altitude,
                          std::vector<double> segment_bearing = {});

/// Centered rolling mean; near the ends the window shrinks symmetrically so
/// linear series pass through unchanged.
std::vector<double> rolling_mean_centered(std::span<const double> values, int window);
/// Centered rolling circular mean of bearings (degrees), same edge rule.
std::vector<double> smooth_bearings(std::span<const double> bearings, int window);

/// Interpolate a raw track onto a uniform distance grid, then smooth altitude
/// and bearing. Throws InsufficientData / ZeroLengthTrack.
RouteProfile resample_profile(std::span<const TrackPoint> points, double step = kResampleStepM);

// ---- GPX ----

/// Track points of every <trk>/<trkseg> in document order. Routes and
/// waypoints are ignored. Throws MalformedFile / EmptyTrack.
std::vector<TrackPoint> parse_gpx(std::string_view bytes);
std::vector<TrackPoint> read_gpx(const std::filesystem::path& path);
std::string write_gpx(std::span<const TrackPoint> points, std::string_view name = "route");

// ---- Activities ----

enum class ActivityType { Ride, Other };

// Per-second samples. Missing samples are NaN.
struct ActivityStreams {
  std::vector<double> power;       // W
  std::vector<double> heart_rate;  // bpm
  std::vector<double> speed;       // m/s
  std::vector<double> latitude;
  std::vector<double> longitude;
  std::vector<double> altitude;

  std::size_t size() const;
  bool empty() const { return size() == 0; }
  bool has_power() const;
  bool has_gps() const;
  std::vector<TrackPoint> track() const;
};

struct ActivityRecord {
  std::string id;
  std::int64_t start_time = 0;  // UTC seconds
  double moving_time = 0.0;     // s
  double elapsed_time = 0.0;    // s
  double distance = 0.0;        // m
  ActivityType type = ActivityType::Ride;
  ActivityStreams streams;

  Day start_day() const { return day_of(start_time); }
};

struct WellnessRecord {
  Day date = 0;
  std::optional<double> ctl, atl, tsb, weight;
};

/// Seconds with speed strictly above the threshold (1 Hz samples).
double compute_moving_time(std::span<const double> speed,
                           double threshold = kMovingThresholdMps);

inline constexpr double kMinMovingTimeS = 1800.0;
inline constexpr double kMinStreamCompleteness = 0.90;
inline constexpr double kMinIntensityFactor = 0.5;

struct Exclusion {
  std::string id;
  std::string reason;
};

struct ScreenResult {
  std::vector<ActivityRecord> retained;
  std::vector<Exclusion> excluded;
};

/// Data-quality screen: outdoor rides of at least 30 min with >= 90% complete
/// GPS/altitude streams and IF >= 0.5 when power is recorded.
ScreenResult screen_activities(std::span<const ActivityRecord> records, double ftp);
std::vector<ActivityRecord> filter_activities(std::span<const ActivityRecord> records, double ftp);

std::vector<ActivityRecord> read_activities_csv(const std::filesystem::path& path);
ActivityStreams read_streams_csv(const std::filesystem::path& path);
std::vector<WellnessRecord> read_wellness_csv(const std::filesystem::path& path);

void write_activities_csv(const std::filesystem::path& path, std::span<const ActivityRecord> records);

}  // namespace ridecast
