#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/geo.hpp"
#include "ridecast/synthetic.hpp"

namespace ridecast {

namespace {

constexpr double kTrackSpacingM = 20.0;
constexpr double kRideIntensity = 0.75;
constexpr std::array<double, kPowerZones> kPowerMix{0.15, 0.35, 0.20, 0.15, 0.08, 0.05, 0.02};
constexpr std::array<double, kHrZones> kHrMix{0.20, 0.35, 0.25, 0.15, 0.05};

struct ClimbBlock {
  double start = 0.0;
  double length = 0.0;
  double gradient = 0.0;  // percent
  double descent_length = 0.0;

  double peak() const { return length * gradient / 100.0; }
  double end() const { return start + length + descent_length; }
  double height(double d) const {
    if (d <= start || d >= end()) return 0.0;
    if (d <= start + length) return (d - start) * gradient / 100.0;
    return peak() * (1.0 - (d - start - length) / descent_length);
  }
};

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::vector<ClimbBlock> layout_climbs(const GeneratorSpec& spec, double total_m, ClimbPlacement placement,
                                      std::mt19937_64& rng) {
  double lo = 0.03, hi = 0.97;
  if (placement == ClimbPlacement::Front) hi = 0.33;
  if (placement == ClimbPlacement::Back) lo = 0.67;
  const double region_start = lo * total_m;
  const double region = (hi - lo) * total_m;

  const int extra = std::poisson_distribution<int>(spec.climbs_per_10km * total_m / 10'000.0)(rng);
  std::vector<ClimbBlock> blocks;
  for (int i = 0; i < 1 + extra; ++i) {
    ClimbBlock b;
    b.length = uniform(rng, spec.climb_length_min_m, spec.climb_length_max_m);
    b.gradient = uniform(rng, spec.climb_gradient_min, spec.climb_gradient_max);
    b.descent_length = b.peak() / uniform(rng, 8.0, 14.0) * 100.0;
    blocks.push_back(b);
  }
  auto used = [&] {
    double s = 0.0;
    for (const auto& b : blocks) s += b.end() - b.start;
    return s;
  };
  while (blocks.size() > 1 && used() > 0.9 * region) blocks.pop_back();
  if (used() > 0.9 * region) {
    const double shrink = 0.9 * region / used();
    blocks[0].length *= shrink;
    blocks[0].descent_length *= shrink;
  }

  std::vector<double> weights(blocks.size() + 1);
  for (auto& w : weights) w = uniform(rng, 0.2, 1.0);
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  const double slack = region - used();
  double cursor = region_start;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    cursor += slack * weights[i] / wsum;
    const double span = blocks[i].end() - blocks[i].start;
    blocks[i].start = cursor;
    cursor += span;
  }
  return blocks;
}

ClimbPlacement pick_placement(ClimbPlacement p, std::mt19937_64& rng) {
  if (p != ClimbPlacement::Mixed) return p;
  static constexpr ClimbPlacement kChoices[] = {ClimbPlacement::Front, ClimbPlacement::Back, ClimbPlacement::Uniform};
  return kChoices[std::uniform_int_distribution<int>(0, 2)(rng)];
}

double sample_distance_km(const GeneratorSpec& spec, std::mt19937_64& rng) {
  const double cv2 = (spec.distance_sd_km / spec.distance_mean_km) * (spec.distance_sd_km / spec.distance_mean_km);
  const double s = std::sqrt(std::log1p(cv2));
  const double mu = std::log(spec.distance_mean_km) - 0.5 * s * s;
  const double d = std::lognormal_distribution<double>(mu, s)(rng);
  return std::clamp(d, spec.distance_min_km, spec.distance_max_km);
}

template <std::size_t N>
std::array<double, N> split_seconds(double seconds, const std::array<double, N>& mix, std::mt19937_64& rng) {
  std::array<double, N> out{};
  double sum = 0.0;
  for (std::size_t z = 0; z < N; ++z) {
    out[z] = mix[z] * uniform(rng, 0.7, 1.3);
    sum += out[z];
  }
  for (auto& v : out) v = std::round(seconds * v / sum);
  return out;
}

}  // namespace

std::string_view to_string(ClimbPlacement placement) {
  switch (placement) {
    case ClimbPlacement::Front: return "front";
    case ClimbPlacement::Back: return "back";
    case ClimbPlacement::Uniform: return "uniform";
    case ClimbPlacement::Mixed: return "mixed";
  }
  return "?";
}

ClimbPlacement parse_climb_placement(std::string_view text) {
  for (auto p : {ClimbPlacement::Front, ClimbPlacement::Back, ClimbPlacement::Uniform, ClimbPlacement::Mixed}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown climb placement '{}'", text));
}

void GeneratorSpec::validate() const {
  auto fail = [](std::string_view what) { throw Error(ErrorCode::InvalidArgument, std::string(what)); };
  if (!(noise_sd_min >= 0.0)) fail("noise sd must be >= 0");
  if (!(distance_min_km > 0.0 && distance_min_km < distance_max_km)) fail("distance range is degenerate");
  if (!(distance_mean_km > 0.0 && distance_sd_km > 0.0)) fail("distance moments must be positive");
  if (!(climb_length_min_m > 0.0 && climb_length_min_m <= climb_length_max_m)) fail("climb length range is invalid");
  if (!(climb_gradient_min > 0.0 && climb_gradient_min <= climb_gradient_max)) fail("climb gradient range is invalid");
  if (roughness_m < 0.0 || turns_per_km < 0.0 || climbs_per_10km < 0.0) fail("rates must be >= 0");
  if (history_days < static_cast<int>(n_activities) + 10) fail("history is too short for the requested rides");
  if (!(rest_probability >= 0.0 && rest_probability < 1.0)) fail("rest probability must be in [0, 1)");
}

std::vector<TrackPoint> generate_track(const GeneratorSpec& spec, double distance_km, ClimbPlacement placement,
                                       std::mt19937_64& rng) {
  const double total = distance_km * 1000.0;
  const auto blocks = layout_climbs(spec, total, pick_placement(placement, rng), rng);

  const double base = uniform(rng, 150.0, 450.0);
  const double amp = spec.roughness_m * uniform(rng, 0.5, 1.5);
  const double wl1 = uniform(rng, 600.0, 1200.0), wl2 = uniform(rng, 1800.0, 3000.0), wl3 = uniform(rng, 150.0, 300.0);
  const double ph1 = uniform(rng, 0.0, 6.28), ph2 = uniform(rng, 0.0, 6.28), ph3 = uniform(rng, 0.0, 6.28);
  const double short_amp = 0.3 * spec.roughness_m * uniform(rng, 0.0, 1.0);
  auto altitude = [&](double d) {
    constexpr double tau = 2.0 * std::numbers::pi;
    double a = base + amp * std::sin(tau * d / wl1 + ph1) + 0.7 * amp * std::sin(tau * d / wl2 + ph2) +
               short_amp * std::sin(tau * d / wl3 + ph3);
    for (const auto& b : blocks) a += b.height(d);
    return a;
  };

  std::vector<TrackPoint> track;
  LatLon pos{uniform(rng, 44.0, 47.0), uniform(rng, 5.0, 11.0)};
  double heading = uniform(rng, 0.0, 360.0);
  const auto steps = static_cast<std::size_t>(std::floor(total / kTrackSpacingM));
  std::normal_distribution<double> wander(0.0, 1.5);
  const double turn_p = spec.turns_per_km * kTrackSpacingM / 1000.0;
  double d = 0.0;
  track.push_back({pos.latitude, pos.longitude, altitude(0.0), std::nullopt});
  for (std::size_t i = 1; i <= steps + 1; ++i) {
    const double next = std::min(total, static_cast<double>(i) * kTrackSpacingM);
    if (next <= d) break;
    heading += wander(rng);
    if (uniform(rng, 0.0, 1.0) < turn_p) heading += (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(rng, 50.0, 110.0);
    heading = std::fmod(heading + 360.0, 360.0);
    pos = destination(pos, heading, next - d);
    d = next;
    track.push_back({pos.latitude, pos.longitude, altitude(d), std::nullopt});
  }
  return track;
}

RouteProfile profile_from_track(std::span<const TrackPoint> track) {
  return resample_profile(parse_gpx(write_gpx(track)));
}

RouteProfile generate_route(const GeneratorSpec& spec, std::mt19937_64& rng) {
  const auto track = generate_track(spec, sample_distance_km(spec, rng), spec.placement, rng);
  return profile_from_track(track);
}

double ground_truth_minutes(const GeneratorSpec& spec, const TopologyFeatures& topology, double ctl) {
  double minutes = spec.truth_intercept + spec.ctl_coefficient * ctl;
  for (const auto& [name, coef] : spec.truth_coefficients) {
    const auto v = topology.get(name);
    if (!v) throw Error(ErrorCode::InvalidArgument, fmt::format("ground truth feature '{}' is missing", name));
    minutes += coef * *v;
  }
  return minutes;
}

SyntheticCorpus generate_corpus(const GeneratorSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  SyntheticCorpus corpus;
  corpus.spec = spec;

  const double phase = uniform(rng, 0.0, 6.28);
  std::normal_distribution<double> tss_noise(0.0, 15.0);
  for (int i = 0; i < spec.history_days; ++i) {
    DailyLoad load;
    load.date = spec.first_day + i;
    const double frac = static_cast<double>(i) / spec.history_days;
    const double mean = spec.tss_start + (spec.tss_end - spec.tss_start) * frac +
                        spec.tss_seasonal * std::sin(2.0 * std::numbers::pi * i / 91.0 + phase);
    const double noise = tss_noise(rng);
    if (uniform(rng, 0.0, 1.0) >= spec.rest_probability) load.tss = std::max(0.0, std::round(mean + noise));
    const double seconds = load.tss / (kRideIntensity * kRideIntensity * 100.0) * 3600.0;
    load.power_zone_seconds = split_seconds(seconds, kPowerMix, rng);
    load.hr_zone_seconds = split_seconds(seconds, kHrMix, rng);
    corpus.history.push_back(load);
  }

  std::vector<int> offsets;
  for (int i = 10; i < spec.history_days; ++i) offsets.push_back(i);
  std::shuffle(offsets.begin(), offsets.end(), rng);
  offsets.resize(spec.n_activities);
  std::sort(offsets.begin(), offsets.end());

  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const int off = offsets[k];
    const Day day = spec.first_day + off;
    SyntheticActivity act;
    act.track = generate_track(spec, sample_distance_km(spec, rng), spec.placement, rng);
    act.profile = profile_from_track(act.track);
    const TopologyFeatures topo = extract_topology(act.profile);
    act.state = fitness_before(corpus.history, day);
    act.true_minutes = ground_truth_minutes(spec, topo, act.state.ctl);
    const double eps = noise(rng);
    const double minutes = std::max(35.0, act.true_minutes + spec.noise_sd_min * eps);

    auto& rec = act.record;
    rec.id = fmt::format("syn-{:03}", k + 1);
    rec.start_time = static_cast<std::int64_t>(day) * 86400 + 7 * 3600 +
                     std::uniform_int_distribution<int>(0, 4 * 3600)(rng);
    rec.moving_time = minutes * 60.0;
    rec.elapsed_time = std::round(rec.moving_time * 1.08);
    rec.distance = act.profile.total_distance();
    rec.type = ActivityType::Ride;

    auto& load = corpus.history[static_cast<std::size_t>(off)];
    const double hours = minutes / 60.0;
    load.tss += std::round(hours * kRideIntensity * kRideIntensity * 100.0);
    const auto pz = split_seconds(hours * 3600.0, kPowerMix, rng);
    const auto hz = split_seconds(hours * 3600.0, kHrMix, rng);
    for (int z = 0; z < kPowerZones; ++z) load.power_zone_seconds[z] += pz[z];
    for (int z = 0; z < kHrZones; ++z) load.hr_zone_seconds[z] += hz[z];
    corpus.activities.push_back(std::move(act));
  }
  return corpus;
}

void write_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "routes");
  std::vector<ActivityRecord> records;
  for (const auto& a : corpus.activities) {
    records.push_back(a.record);
    csv::write_file_atomic(dir / "routes" / (a.record.id + ".gpx"), write_gpx(a.track, a.record.id));
  }
  write_activities_csv(dir / "activities.csv", records);
  write_daily_tss_csv(dir / "daily_tss.csv", corpus.history);
  write_zone_seconds_csv(dir / "zones.csv", corpus.history);
}

Dataset corpus_dataset(const SyntheticCorpus& corpus, FeatureConfig config) {
  std::vector<ActivityRecord> records;
  std::map<std::string, RouteProfile> profiles;
  for (const auto& a : corpus.activities) {
    records.push_back(a.record);
    profiles.emplace(a.record.id, a.profile);
  }
  return assemble(records, profiles, corpus.history, config);
}

}  // namespace ridecast
