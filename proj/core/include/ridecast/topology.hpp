#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ridecast/ingest.hpp"

namespace ridecast {

inline constexpr double kClimbMinGradient = 3.0;   // percent
inline constexpr double kClimbMinLength = 500.0;   // m
inline constexpr double kClimbMergeGap = 100.0;    // m
inline constexpr double kClimbMinScore = 1500.0;
inline constexpr double kRecoveryWindow = 500.0;   // m after a climb ends
inline constexpr double kRecoveryMaxGradient = 2.0;
inline constexpr double kTechnicalGradient = -5.0;
inline constexpr double kSharpTurnDeg = 45.0;
inline constexpr double kSustainedWindow = 500.0;  // m

enum class ClimbCategory { HC, Cat1, Cat2, Cat3, Cat4, Uncategorized };

std::string_view to_string(ClimbCategory c);

struct ClimbScore {
  double score = 0.0;
  ClimbCategory category = ClimbCategory::Uncategorized;
};

/// score = length * gradient, binned at 80k/64k/32k/16k/8k (inclusive).
ClimbScore score_and_categorize(double length_m, double gradient_pct);

struct Climb {
  std::size_t first_segment = 0;  // segments [first_segment, end_segment)
  std::size_t end_segment = 0;
  double start_m = 0.0;
  double end_m = 0.0;
  double length = 0.0;
  double avg_gradient = 0.0;  // distance weighted, percent
  double score = 0.0;         // length * avg_gradient
  double tdf_score = 0.0;     // avg_gradient^2 * length
  ClimbCategory category = ClimbCategory::Uncategorized;

  bool operator==(const Climb&) const = default;
};

// Runs of segments with gradient >= 3% are merged across gaps shorter than
// 100 m. A merged group whose average falls below 3% is split back into its
// runs. Candidates need length >= 500 m, average >= 3% and score > 1500.
std::vector<Climb> detect_climbs(const RouteProfile& profile);

/// Population standard deviation of |g[t+1] - g[t]|.
double punchiness(std::span<const double> gradients);
double punchiness(const RouteProfile& profile);

enum GradientBucket : std::size_t {
  kBucketNegative,
  kBucket0To2,
  kBucket2To4,
  kBucket4To6,
  kBucket6To10,
  kBucket10Plus,
  kBucketCount
};

struct GradientDistribution {
  std::array<double, kBucketCount> buckets{};  // fractions of distance
  double above_5 = 0.0;
  double above_8 = 0.0;
  double above_10 = 0.0;
};

/// Half-open buckets g<0, [0,2), [2,4), [4,6), [6,10), [10,inf).
GradientDistribution gradient_distribution(const RouteProfile& profile);

double recovery_distance(const RouteProfile& profile, std::span<const Climb> climbs);

/// Per grid point change of heading: angle between the smoothed bearing of
/// the five segments after the point and of the five before it. Zero where
/// either window would run past the route ends.
std::vector<double> bearing_changes(const RouteProfile& profile);

double technical_descent(const RouteProfile& profile);

struct TurnStats {
  int count = 0;
  double density = 0.0;  // turns per km
};

/// A turn is a maximal run of points whose bearing change exceeds 45 degrees.
TurnStats sharp_turns(const RouteProfile& profile);

struct SustainedGradient {
  double gradient = 0.0;    // percent
  double location_m = 0.0;  // start of the window
};

/// Steepest rolling mean over `window` metres; ties go to the earliest start.
SustainedGradient max_sustained_gradient(const RouteProfile& profile, double window = kSustainedWindow);

struct TopologyFeatures {
  double total_distance = 0.0;  // km
  double total_ascent = 0.0;
  double total_descent = 0.0;
  double elevation_min = 0.0;
  double elevation_max = 0.0;
  double elevation_avg = 0.0;
  double elevation_gain_per_km = 0.0;

  double punchiness_score = 0.0;
  double gradient_std = 0.0;
  std::optional<double> gradient_cv;  // missing when mean gradient is ~0

  int num_climbs = 0;
  int num_hc = 0;
  int num_cat1 = 0;
  int num_cat2 = 0;
  int num_cat3 = 0;
  int num_cat4 = 0;
  int num_uncategorized = 0;
  double total_climb_score = 0.0;
  double max_climb_score = 0.0;
  double total_tdf_score = 0.0;
  double climb_density = 0.0;

  double avg_climb_gradient = 0.0;
  double avg_climb_length = 0.0;
  double max_climb_length = 0.0;
  double total_climb_length = 0.0;

  GradientDistribution distribution;

  int num_sharp_turns = 0;
  double turn_density = 0.0;
  double recovery_distance = 0.0;
  double technical_descent = 0.0;
  double max_sustained_gradient = 0.0;
  double max_sustained_gradient_location = 0.0;  // m
  double longest_climb_distance = 0.0;

  std::array<double, 3> ascent_by_third{};  // fraction of total ascent

  std::vector<Climb> climbs;

  /// Flat name -> value view in canonical order (see topology_feature_names()).
  std::vector<std::pair<std::string, std::optional<double>>> to_map() const;
  std::optional<double> get(std::string_view name) const;
};

/// Every extracted topology name in canonical order.
const std::vector<std::string>& topology_feature_names();

TopologyFeatures extract_topology(const RouteProfile& profile);

}  // namespace ridecast
