#include "ridecast/athlete.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"

namespace ridecast {

void ZoneConfig::validate() const {
  if (!(ftp > 0.0)) throw Error(ErrorCode::NonPositiveFtp, fmt::format("FTP must be positive, got {}", ftp));
  if (!(max_hr > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_hr must be positive");
  if (power_bounds.size() != kPowerZones - 1) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("need {} power zone bounds", kPowerZones - 1));
  }
  if (hr_bounds.size() != kHrZones - 1) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("need {} heart-rate zone bounds", kHrZones - 1));
  }
  auto increasing = [](const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(a < b); }) == v.end();
  };
  if (!increasing(power_bounds) || !increasing(hr_bounds)) {
    throw Error(ErrorCode::InvalidArgument, "zone bounds must be strictly increasing");
  }
}

namespace {
int zone_index(double value, double reference, const std::vector<double>& bounds) {
  int z = 0;
  for (double b : bounds) {
    if (value >= b * reference) ++z;
  }
  return z;
}
}  // namespace

int ZoneConfig::power_zone(double watts) const { return zone_index(watts, ftp, power_bounds); }
int ZoneConfig::hr_zone(double bpm) const { return zone_index(bpm, max_hr, hr_bounds); }

ZoneConfig zone_config_from_json(const nlohmann::json& j) {
  ZoneConfig c;
  c.ftp = j.value("ftp", c.ftp);
  c.max_hr = j.value("max_hr", c.max_hr);
  if (j.contains("power_zones")) c.power_bounds = j.at("power_zones").get<std::vector<double>>();
  if (j.contains("hr_zones")) c.hr_bounds = j.at("hr_zones").get<std::vector<double>>();
  c.validate();
  return c;
}

nlohmann::json to_json(const ZoneConfig& c) {
  return {{"ftp", c.ftp}, {"max_hr", c.max_hr}, {"power_zones", c.power_bounds}, {"hr_zones", c.hr_bounds}};
}

ZoneConfig read_zone_config(const std::filesystem::path& path) {
  try {
    return zone_config_from_json(nlohmann::json::parse(csv::read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, fmt::format("zone config '{}': {}", path.string(), e.what()));
  }
}

double normalized_power(std::span<const double> power) {
  if (power.size() < kNpWindowS) {
    throw Error(ErrorCode::SeriesTooShort,
                fmt::format("normalized power needs {} samples, got {}", kNpWindowS, power.size()));
  }
  auto sample = [&](std::size_t i) { return std::isfinite(power[i]) ? power[i] : 0.0; };
  double window = 0.0;
  for (std::size_t i = 0; i < kNpWindowS; ++i) window += sample(i);
  double sum4 = 0.0;
  const std::size_t count = power.size() - kNpWindowS + 1;
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0) window += sample(k + kNpWindowS - 1) - sample(k - 1);
    const double avg = window / static_cast<double>(kNpWindowS);
    sum4 += avg * avg * avg * avg;
  }
  return std::pow(sum4 / static_cast<double>(count), 0.25);
}

double compute_tss(std::span<const double> power, double ftp) {
  if (!(ftp > 0.0)) throw Error(ErrorCode::NonPositiveFtp, fmt::format("FTP must be positive, got {}", ftp));
  const double np = normalized_power(power);
  const double intensity = np / ftp;
  const double duration = static_cast<double>(power.size());
  return duration * np * intensity / (ftp * 3600.0) * 100.0;
}

ZoneSeconds zone_seconds(std::span<const double> power, std::span<const double> heart_rate,
                         const ZoneConfig& config) {
  ZoneSeconds out;
  for (double p : power) {
    if (std::isfinite(p)) out.power[config.power_zone(p)] += 1.0;
  }
  for (double h : heart_rate) {
    if (std::isfinite(h) && h > 0.0) out.hr[config.hr_zone(h)] += 1.0;
  }
  return out;
}

std::vector<DailyLoad> normalize_history(std::span<const DailyLoad> history) {
  std::vector<DailyLoad> sorted(history.begin(), history.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].date == sorted[i - 1].date) {
      throw Error(ErrorCode::DuplicateDay, fmt::format("two load records on {}", format_date(sorted[i].date)));
    }
  }
  return sorted;
}

namespace {

// Fitness states for every day in [first, last_day], zero-filling gaps.
// Only records dated <= last_day are read.
std::vector<FitnessState> evolve_through(const std::vector<DailyLoad>& sorted, Day last_day) {
  std::vector<FitnessState> states;
  if (sorted.empty() || last_day < sorted.front().date) return states;
  const Day first = sorted.front().date;
  states.reserve(static_cast<std::size_t>(last_day - first + 1));
  double ctl = 0.0, atl = 0.0;
  std::size_t next = 0;
  for (Day d = first; d <= last_day; ++d) {
    double tss = 0.0;
    if (next < sorted.size() && sorted[next].date == d) tss = sorted[next++].tss;
    ctl += (tss - ctl) / kCtlDays;
    atl += (tss - atl) / kAtlDays;
    FitnessState s;
    s.date = d;
    s.ctl = ctl;
    s.atl = atl;
    s.tsb = ctl - atl;
    const auto idx = static_cast<std::size_t>(d - first);
    s.ramp_rate = idx >= static_cast<std::size_t>(kRampDays) ? ctl - states[idx - kRampDays].ctl : 0.0;
    states.push_back(s);
  }
  return states;
}

}  // namespace

std::vector<FitnessState> evolve_fitness(std::span<const DailyLoad> history) {
  const auto sorted = normalize_history(history);
  if (sorted.empty()) return {};
  return evolve_through(sorted, sorted.back().date);
}

FitnessState fitness_before(std::span<const DailyLoad> history, Day t, WindowBoundary boundary) {
  const Day last_day = boundary == WindowBoundary::Strict ? t - 1 : t;
  std::vector<DailyLoad> usable;
  for (const auto& d : history) {
    if (d.date <= last_day) usable.push_back(d);
  }
  const auto states = evolve_through(normalize_history(usable), last_day);
  FitnessState s;
  if (!states.empty()) s = states.back();
  s.date = t;
  return s;
}

double rolling_zone_hours(std::span<const DailyLoad> history, Day t, int window_days, Channel channel,
                          int zone, WindowBoundary boundary) {
  const int zones = channel == Channel::Power ? kPowerZones : kHrZones;
  if (zone < 0 || zone >= zones) throw Error(ErrorCode::UnknownZone, fmt::format("zone {} out of range", zone));
  if (window_days < 1) throw Error(ErrorCode::InvalidArgument, "window must be at least one day");
  double seconds = 0.0;
  for (const auto& d : history) {
    const bool after_start = d.date > t - window_days;
    const bool before_end = boundary == WindowBoundary::Strict ? d.date < t : d.date <= t;
    if (!after_start || !before_end) continue;
    seconds += channel == Channel::Power ? d.power_zone_seconds[static_cast<std::size_t>(zone)]
                                         : d.hr_zone_seconds[static_cast<std::size_t>(zone)];
  }
  return seconds / 3600.0;
}

StateFeatures build_state_features(std::span<const DailyLoad> history, Day t, WindowBoundary boundary) {
  StateFeatures out;
  out.reserve(4 + kZoneWindows.size() * (kPowerZones + kHrZones));
  const auto fitness = fitness_before(history, t, boundary);
  out.emplace_back("ctl", fitness.ctl);
  out.emplace_back("atl", fitness.atl);
  out.emplace_back("tsb", fitness.tsb);
  out.emplace_back("ramp_rate", fitness.ramp_rate);
  for (Channel channel : {Channel::Power, Channel::HeartRate}) {
    const int zones = channel == Channel::Power ? kPowerZones : kHrZones;
    const char* label = channel == Channel::Power ? "power" : "hr";
    for (int w : kZoneWindows) {
      for (int z = 0; z < zones; ++z) {
        out.emplace_back(fmt::format("rolling_{}d_{}_z{}_hours", w, label, z),
                         rolling_zone_hours(history, t, w, channel, z, boundary));
      }
    }
  }
  return out;
}

StateFeatureBuilder strict_state_builder() {
  return [](std::span<const DailyLoad> history, Day t) { return build_state_features(history, t); };
}

std::vector<DailyLoad> merge_loads(std::span<const DailyLoad> a, std::span<const DailyLoad> b) {
  std::map<Day, DailyLoad> by_day;
  for (auto src : {a, b}) {
    for (const auto& d : src) {
      auto& slot = by_day[d.date];
      slot.date = d.date;
      slot.tss += d.tss;
      for (int z = 0; z < kPowerZones; ++z) slot.power_zone_seconds[z] += d.power_zone_seconds[z];
      for (int z = 0; z < kHrZones; ++z) slot.hr_zone_seconds[z] += d.hr_zone_seconds[z];
    }
  }
  std::vector<DailyLoad> out;
  out.reserve(by_day.size());
  for (auto& [day, load] : by_day) out.push_back(load);
  return out;
}

std::vector<DailyLoad> read_zone_seconds_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const auto c_date = table.require_column("date");
  const auto c_channel = table.require_column("channel");
  const auto c_zone = table.require_column("zone");
  const auto c_seconds = table.require_column("seconds");
  std::map<Day, DailyLoad> by_day;
  for (const auto& row : table.rows) {
    const Day day = parse_date(row[c_date]);
    const auto zone_value = csv::parse_double(row[c_zone]);
    const double seconds = csv::parse_double(row[c_seconds]).value_or(0.0);
    if (!zone_value) throw Error(ErrorCode::MalformedFile, "zone-seconds row without zone");
    const int zone = static_cast<int>(*zone_value);
    auto& load = by_day[day];
    load.date = day;
    if (row[c_channel] == "power") {
      if (zone < 0 || zone >= kPowerZones) throw Error(ErrorCode::UnknownZone, fmt::format("power zone {}", zone));
      load.power_zone_seconds[zone] += seconds;
    } else if (row[c_channel] == "hr") {
      if (zone < 0 || zone >= kHrZones) throw Error(ErrorCode::UnknownZone, fmt::format("hr zone {}", zone));
      load.hr_zone_seconds[zone] += seconds;
    } else {
      throw Error(ErrorCode::MalformedFile, fmt::format("unknown channel '{}'", row[c_channel]));
    }
  }
  std::vector<DailyLoad> out;
  for (auto& [d, load] : by_day) out.push_back(load);
  return out;
}

std::vector<DailyLoad> read_daily_tss_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const auto c_date = table.require_column("date");
  const auto c_tss = table.require_column("tss");
  std::vector<DailyLoad> out;
  for (const auto& row : table.rows) {
    DailyLoad d;
    d.date = parse_date(row[c_date]);
    d.tss = csv::parse_double(row[c_tss]).value_or(0.0);
    if (d.tss < 0.0) throw Error(ErrorCode::MalformedFile, "negative TSS");
    out.push_back(d);
  }
  return normalize_history(out);
}

void write_zone_seconds_csv(const std::filesystem::path& path, std::span<const DailyLoad> history) {
  std::string text = "date,channel,zone,seconds\n";
  for (const auto& d : history) {
    for (int z = 0; z < kPowerZones; ++z) {
      if (d.power_zone_seconds[z] > 0.0) {
        text += fmt::format("{},power,{},{}\n", format_date(d.date), z, csv::format_double(d.power_zone_seconds[z]));
      }
    }
    for (int z = 0; z < kHrZones; ++z) {
      if (d.hr_zone_seconds[z] > 0.0) {
        text += fmt::format("{},hr,{},{}\n", format_date(d.date), z, csv::format_double(d.hr_zone_seconds[z]));
      }
    }
  }
  csv::write_file_atomic(path, text);
}

void write_daily_tss_csv(const std::filesystem::path& path, std::span<const DailyLoad> history) {
  std::string text = "date,tss\n";
  for (const auto& d : history) text += fmt::format("{},{}\n", format_date(d.date), csv::format_double(d.tss));
  csv::write_file_atomic(path, text);
}

}  // namespace ridecast
