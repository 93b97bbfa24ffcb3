#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "ridecast/athlete.hpp"
#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/ingest.hpp"

namespace ridecast {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool any_finite(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}
}  // namespace

std::size_t ActivityStreams::size() const {
  return std::max({power.size(), heart_rate.size(), speed.size(), latitude.size(), longitude.size(),
                   altitude.size()});
}

bool ActivityStreams::has_power() const { return any_finite(power); }

bool ActivityStreams::has_gps() const { return any_finite(latitude) && any_finite(longitude); }

std::vector<TrackPoint> ActivityStreams::track() const {
  std::vector<TrackPoint> pts;
  const std::size_t n = std::min(latitude.size(), longitude.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(latitude[i]) || !std::isfinite(longitude[i])) continue;
    TrackPoint p{latitude[i], longitude[i], std::nullopt, static_cast<std::int64_t>(i)};
    if (i < altitude.size() && std::isfinite(altitude[i])) p.altitude = altitude[i];
    pts.push_back(p);
  }
  return pts;
}

double compute_moving_time(std::span<const double> speed, double threshold) {
  if (speed.empty()) throw Error(ErrorCode::EmptySeries, "speed series is empty");
  return static_cast<double>(
      std::count_if(speed.begin(), speed.end(), [threshold](double v) { return v > threshold; }));
}

namespace {

// Fraction of samples where latitude, longitude and altitude are all present.
double gps_completeness(const ActivityStreams& s) {
  const std::size_t n = s.size();
  if (n == 0) return 0.0;
  std::size_t complete = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool ok = i < s.latitude.size() && std::isfinite(s.latitude[i]) && i < s.longitude.size() &&
                    std::isfinite(s.longitude[i]) && i < s.altitude.size() && std::isfinite(s.altitude[i]);
    complete += ok ? 1 : 0;
  }
  return static_cast<double>(complete) / static_cast<double>(n);
}

bool gps_moves(const ActivityStreams& s) {
  std::optional<LatLon> first;
  const std::size_t n = std::min(s.latitude.size(), s.longitude.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(s.latitude[i]) || !std::isfinite(s.longitude[i])) continue;
    const LatLon p{s.latitude[i], s.longitude[i]};
    if (!first) {
      first = p;
    } else if (haversine(*first, p) > 0.0) {
      return true;
    }
  }
  return false;
}

}  // namespace

ScreenResult screen_activities(std::span<const ActivityRecord> records, double ftp) {
  ScreenResult result;
  for (const auto& rec : records) {
    std::string reason;
    if (rec.type != ActivityType::Ride) {
      reason = "not a ride";
    } else if (rec.distance <= 0.0 ||
               (!rec.streams.latitude.empty() && (!rec.streams.has_gps() || !gps_moves(rec.streams)))) {
      reason = "indoor (no GPS movement)";
    } else if (rec.moving_time < kMinMovingTimeS) {
      reason = fmt::format("moving time {:.0f} s below {:.0f} s", rec.moving_time, kMinMovingTimeS);
    } else if (!rec.streams.empty() && rec.streams.has_gps() &&
               gps_completeness(rec.streams) < kMinStreamCompleteness) {
      reason = fmt::format("GPS/altitude streams {:.1f}% complete", 100.0 * gps_completeness(rec.streams));
    } else if (rec.streams.has_power() && rec.streams.power.size() >= kNpWindowS) {
      const double intensity = normalized_power(rec.streams.power) / ftp;
      if (intensity < kMinIntensityFactor) reason = fmt::format("intensity factor {:.2f} below 0.5", intensity);
    }
    if (reason.empty()) {
      result.retained.push_back(rec);
    } else {
      result.excluded.push_back({rec.id, std::move(reason)});
    }
  }
  return result;
}

std::vector<ActivityRecord> filter_activities(std::span<const ActivityRecord> records, double ftp) {
  return screen_activities(records, ftp).retained;
}

std::vector<ActivityRecord> read_activities_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const auto c_id = table.require_column("id");
  const auto c_start = table.require_column("start_time");
  const auto c_moving = table.require_column("moving_time");
  const auto c_elapsed = table.column("elapsed_time");
  const auto c_dist = table.require_column("distance");
  const auto c_type = table.column("type");

  std::vector<ActivityRecord> out;
  std::set<std::string> seen;
  for (const auto& row : table.rows) {
    ActivityRecord rec;
    rec.id = row[c_id];
    if (rec.id.empty()) throw Error(ErrorCode::MalformedFile, "activity with empty id");
    if (!seen.insert(rec.id).second) throw Error(ErrorCode::MalformedFile, fmt::format("duplicate activity id '{}'", rec.id));
    rec.start_time = parse_datetime(row[c_start]);
    rec.moving_time = csv::parse_double(row[c_moving]).value_or(kNaN);
    rec.elapsed_time = c_elapsed ? csv::parse_double(row[*c_elapsed]).value_or(rec.moving_time) : rec.moving_time;
    rec.distance = csv::parse_double(row[c_dist]).value_or(0.0);
    if (rec.distance < 0.0) throw Error(ErrorCode::MalformedFile, fmt::format("activity '{}' has negative distance", rec.id));
    if (std::isfinite(rec.moving_time) && std::isfinite(rec.elapsed_time) && rec.moving_time > rec.elapsed_time) {
      throw Error(ErrorCode::MalformedFile, fmt::format("activity '{}' moving_time exceeds elapsed_time", rec.id));
    }
    if (c_type) {
      const auto t = lower(row[*c_type]);
      rec.type = (t == "ride" || t == "mountainbikeride" || t == "gravelride") ? ActivityType::Ride : ActivityType::Other;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

ActivityStreams read_streams_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const auto c_t = table.require_column("t");
  ActivityStreams s;
  if (table.rows.empty()) return s;

  std::vector<double> times;
  times.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    const auto t = csv::parse_double(row[c_t]);
    if (!t) throw Error(ErrorCode::MalformedFile, "stream row without time");
    if (!times.empty() && *t <= times.back()) throw Error(ErrorCode::MalformedFile, "stream time not increasing");
    times.push_back(*t);
  }
  const double t0 = times.front();
  const auto n = static_cast<std::size_t>(std::llround(times.back() - t0)) + 1;

  auto load = [&](std::string_view name, std::vector<double>& dest) {
    const auto col = table.column(name);
    if (!col) return;
    dest.assign(n, kNaN);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto idx = static_cast<std::size_t>(std::llround(times[r] - t0));
      dest[idx] = csv::parse_double(table.rows[r][*col]).value_or(kNaN);
    }
  };
  load("power", s.power);
  load("hr", s.heart_rate);
  load("speed", s.speed);
  load("lat", s.latitude);
  load("lon", s.longitude);
  load("alt", s.altitude);
  return s;
}

std::vector<WellnessRecord> read_wellness_csv(const std::filesystem::path& path) {
  const auto table = csv::read_file(path);
  const auto c_date = table.require_column("date");
  auto opt = [&](const std::vector<std::string>& row, std::string_view name) -> std::optional<double> {
    const auto col = table.column(name);
    return col ? csv::parse_double(row[*col]) : std::nullopt;
  };
  std::vector<WellnessRecord> out;
  std::set<Day> seen;
  for (const auto& row : table.rows) {
    WellnessRecord w;
    w.date = parse_date(row[c_date]);
    if (!seen.insert(w.date).second) {
      throw Error(ErrorCode::DuplicateDay, fmt::format("two wellness records on {}", format_date(w.date)));
    }
    w.ctl = opt(row, "ctl");
    w.atl = opt(row, "atl");
    w.tsb = opt(row, "tsb");
    w.weight = opt(row, "weight");
    out.push_back(w);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  return out;
}

void write_activities_csv(const std::filesystem::path& path, std::span<const ActivityRecord> records) {
  std::string text = "id,start_time,moving_time,elapsed_time,distance,type\n";
  for (const auto& r : records) {
    text += csv::join_row({r.id, format_datetime(r.start_time), csv::format_double(r.moving_time),
                           csv::format_double(r.elapsed_time), csv::format_double(r.distance),
                           r.type == ActivityType::Ride ? "Ride" : "Other"});
  }
  csv::write_file_atomic(path, text);
}

}  // namespace ridecast
