#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ridecast {

/// Calendar day as a count of days since 1970-01-01 (UTC).
using Day = std::int32_t;

Day parse_date(std::string_view iso_date);
/// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS` with optional fraction and a
/// `Z` or `+hh:mm` suffix. Returns UTC seconds since the epoch.
std::int64_t parse_datetime(std::string_view iso);
Day day_of(std::int64_t utc_seconds);
std::string format_date(Day day);
std::string format_datetime(std::int64_t utc_seconds);

}  // namespace ridecast
