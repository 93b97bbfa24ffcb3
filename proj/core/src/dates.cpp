#include "ridecast/dates.hpp"

#include <charconv>
#include <chrono>

#include <fmt/format.h>

#include "ridecast/error.hpp"

namespace ridecast {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
  if (pos + len > text.size()) {
    throw Error(ErrorCode::MalformedFile, fmt::format("bad date/time '{}'", whole));
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
  if (ec != std::errc() || ptr != text.data() + pos + len) {
    throw Error(ErrorCode::MalformedFile, fmt::format("bad date/time '{}'", whole));
  }
  return value;
}

Day civil_day(int y, int m, int d, std::string_view whole) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::MalformedFile, fmt::format("invalid calendar date '{}'", whole));
  }
  return static_cast<Day>(sys_days{ymd}.time_since_epoch().count());
}

}  // namespace

Day parse_date(std::string_view iso) {
  if (iso.size() < 10 || iso[4] != '-' || iso[7] != '-') {
    throw Error(ErrorCode::MalformedFile, fmt::format("bad date '{}'", iso));
  }
  return civil_day(read_int(iso, 0, 4, iso), read_int(iso, 5, 2, iso), read_int(iso, 8, 2, iso), iso);
}

std::int64_t parse_datetime(std::string_view iso) {
  const Day day = parse_date(iso);
  std::int64_t seconds = static_cast<std::int64_t>(day) * 86400;
  if (iso.size() == 10) return seconds;
  if (iso[10] != 'T' && iso[10] != ' ') {
    throw Error(ErrorCode::MalformedFile, fmt::format("bad date/time '{}'", iso));
  }
  const int hh = read_int(iso, 11, 2, iso);
  const int mm = read_int(iso, 14, 2, iso);
  const int ss = read_int(iso, 17, 2, iso);
  seconds += hh * 3600 + mm * 60 + ss;
  std::size_t pos = 19;
  if (pos < iso.size() && iso[pos] == '.') {
    ++pos;
    while (pos < iso.size() && iso[pos] >= '0' && iso[pos] <= '9') ++pos;
  }
  if (pos < iso.size()) {
    const char tz = iso[pos];
    if (tz == 'Z') {
      ++pos;
    } else if (tz == '+' || tz == '-') {
      const int oh = read_int(iso, pos + 1, 2, iso);
      const int om = read_int(iso, pos + 4, 2, iso);
      const int offset = oh * 3600 + om * 60;
      seconds += (tz == '+') ? -offset : offset;
      pos += 6;
    }
  }
  if (pos != iso.size()) {
    throw Error(ErrorCode::MalformedFile, fmt::format("bad date/time '{}'", iso));
  }
  return seconds;
}

Day day_of(std::int64_t utc_seconds) {
  std::int64_t d = utc_seconds / 86400;
  if (utc_seconds % 86400 < 0) --d;
  return static_cast<Day>(d);
}

std::string format_date(Day day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day}}};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::string format_datetime(std::int64_t utc_seconds) {
  const Day day = day_of(utc_seconds);
  const std::int64_t rem = utc_seconds - static_cast<std::int64_t>(day) * 86400;
  return fmt::format("{}T{:02d}:{:02d}:{:02d}Z", format_date(day), rem / 3600, (rem / 60) % 60, rem % 60);
}

}  // namespace ridecast
