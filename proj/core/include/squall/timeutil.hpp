#pragma once

#include <cstdint>
#include <string>

namespace squall {

struct CivilTime {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
  int hour = 0;
  int minute = 0;
  int second = 0;
};

std::int64_t to_epoch_seconds(const CivilTime& c);
CivilTime to_civil(std::int64_t epoch_seconds);

/// Accepts "YYYY-MM-DDTHH:MM:SSZ", "YYYY-MM-DD HH:MM:SS", and the same
/// without seconds. Throws DataError on anything else.
std::int64_t parse_time_utc(const std::string& text);

/// Non-throwing form; returns false and leaves `out` untouched on failure.
bool try_parse_time_utc(const std::string& text, std::int64_t& out);

/// ISO 8601 with trailing Z, e.g. "2018-07-04T12:00:00Z".
std::string format_time_utc(std::int64_t epoch_seconds);

int month_of(std::int64_t epoch_seconds);  // 1..12
int hour_of(std::int64_t epoch_seconds);   // 0..23

inline bool six_hour_aligned(std::int64_t t) {
  constexpr std::int64_t step = 6 * 3600;
  return ((t % step) + step) % step == 0;
}

}  // namespace squall
