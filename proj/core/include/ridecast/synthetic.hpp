#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ridecast/athlete.hpp"
#include "ridecast/dataset.hpp"
#include "ridecast/ingest.hpp"
#include "ridecast/topology.hpp"

namespace ridecast {

enum class ClimbPlacement { Front, Back, Uniform, Mixed };

std::string_view to_string(ClimbPlacement placement);
ClimbPlacement parse_climb_placement(std::string_view text);

struct GeneratorSpec {
  std::uint64_t seed = 42;
  std::size_t n_activities = 96;

  double distance_mean_km = 24.4;
  double distance_sd_km = 13.1;
  double distance_min_km = 10.2;
  double distance_max_km = 110.1;

  ClimbPlacement placement = ClimbPlacement::Mixed;
  double climbs_per_10km = 2.0;  // Poisson rate on top of one guaranteed climb
  double climb_length_min_m = 700.0;
  double climb_length_max_m = 3000.0;
  double climb_gradient_min = 5.0;
  double climb_gradient_max = 11.0;
  double roughness_m = 1.0;     // amplitude of rolling terrain
  double turns_per_km = 0.8;    // sharp direction changes

  // Ground truth: minutes = intercept + sum(coef * topology feature) + ctl_coefficient * ctl + noise.
  double truth_intercept = 36.0;
  std::map<std::string, double> truth_coefficients{{"total_distance", 2.4}, {"total_ascent", 0.06}};
  double ctl_coefficient = -0.25;
  double noise_sd_min = 5.0;

  // Daily training load outside the recorded rides.
  Day first_day = 19358;  // 2023-01-01
  int history_days = 420;
  double tss_start = 20.0;
  double tss_end = 58.0;
  double tss_seasonal = 20.0;
  double rest_probability = 0.3;

  void validate() const;
};

struct SyntheticActivity {
  ActivityRecord record;
  std::vector<TrackPoint> track;
  RouteProfile profile;
  FitnessState state;  // at the start of the ride day
  double true_minutes = 0.0;  // before noise
};

struct SyntheticCorpus {
  GeneratorSpec spec;
  std::vector<SyntheticActivity> activities;
  std::vector<DailyLoad> history;  // tss plus zone seconds, rides included
};

std::vector<TrackPoint> generate_track(const GeneratorSpec& spec, double distance_km, ClimbPlacement placement,
                                       std::mt19937_64& rng);
/// A track passed through the GPX writer/reader and resampled, exactly as
/// the ingest path would see it.
RouteProfile generate_route(const GeneratorSpec& spec, std::mt19937_64& rng);
RouteProfile profile_from_track(std::span<const TrackPoint> track);

double ground_truth_minutes(const GeneratorSpec& spec, const TopologyFeatures& topology, double ctl);

SyntheticCorpus generate_corpus(const GeneratorSpec& spec);

/// activities.csv, routes/<id>.gpx, daily_tss.csv, zones.csv.
void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

/// In-memory equivalent of ingesting a written corpus.
Dataset corpus_dataset(const SyntheticCorpus& corpus, FeatureConfig config);

}  // namespace ridecast
