#include "squall/timeutil.hpp"

#include <cstdio>

#include "squall/error.hpp"

namespace squall {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::int64_t to_epoch_seconds(const CivilTime& c) {
  if (c.month < 1 || c.month > 12 || c.day < 1 || c.day > 31 || c.hour < 0 ||
      c.hour > 23 || c.minute < 0 || c.minute > 59 || c.second < 0 ||
      c.second > 60) {
    throw DataError("invalid civil time");
  }
  return days_from_civil(c.year, c.month, c.day) * 86400 + c.hour * 3600 +
         c.minute * 60 + c.second;
}

CivilTime to_civil(std::int64_t t) {
  CivilTime c;
  const std::int64_t days = floor_div(t, 86400);
  std::int64_t sod = t - days * 86400;
  civil_from_days(days, c.year, c.month, c.day);
  c.hour = static_cast<int>(sod / 3600);
  c.minute = static_cast<int>((sod % 3600) / 60);
  c.second = static_cast<int>(sod % 60);
  return c;
}

bool try_parse_time_utc(const std::string& text, std::int64_t& out) {
  CivilTime c;
  char sep = 0;
  char tail[8] = {0};
  int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%7s", &c.year, &c.month,
                      &c.day, &sep, &c.hour, &c.minute, &c.second, tail);
  if (n < 6 || !(sep == 'T' || sep == 't' || sep == ' ')) return false;
  if (n == 6) c.second = 0;
  const std::string rest = (n == 8) ? tail : "";
  if (!rest.empty() && rest != "Z" && rest != "z") return false;
  try {
    out = to_epoch_seconds(c);
  } catch (const DataError&) {
    return false;
  }
  return true;
}

std::int64_t parse_time_utc(const std::string& text) {
  std::int64_t t = 0;
  if (!try_parse_time_utc(text, t))
    throw DataError("unparseable timestamp: '" + text + "'");
  return t;
}

std::string format_time_utc(std::int64_t t) {
  const CivilTime c = to_civil(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", c.year,
                c.month, c.day, c.hour, c.minute, c.second);
  return buf;
}

int month_of(std::int64_t t) { return to_civil(t).month; }
int hour_of(std::int64_t t) { return to_civil(t).hour; }

}  // namespace squall
