#include "squall/best_track.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include "squall/error.hpp"
#include "squall/geodesy.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

constexpr double kKnotsToMs = 0.514444;

std::vector<std::string> split_csv_row(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::optional<double> parse_number(const std::string& raw) {
  const std::string s = trimmed(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

struct Columns {
  int sid = -1;
  int iso_time = -1;
  int lat = -1;
  int lon = -1;
  int wind = -1;
  int pres = -1;
  int nature = -1;
  int name = -1;
};

Columns find_columns(const std::vector<std::string>& header,
                     IbtracsOptions::Agency agency) {
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < header.size(); ++i)
    index.emplace(upper(trimmed(header[i])), static_cast<int>(i));
  auto lookup = [&index](const char* n) {
    auto it = index.find(n);
    return it == index.end() ? -1 : it->second;
  };

  Columns cols;
  cols.sid = lookup("SID");
  cols.iso_time = lookup("ISO_TIME");
  cols.lat = lookup("LAT");
  cols.lon = lookup("LON");
  for (const char* required : {"SID", "ISO_TIME", "LAT", "LON"}) {
    if (index.find(required) == index.end())
      throw DataError(std::string("best track CSV is missing column ") +
                      required);
  }
  const bool usa = agency == IbtracsOptions::Agency::usa;
  cols.wind = lookup(usa ? "USA_WIND" : "WMO_WIND");
  cols.pres = lookup(usa ? "USA_PRES" : "WMO_PRES");
  cols.nature = lookup("NATURE");
  cols.name = lookup("NAME");
  return cols;
}

StormNature nature_of(const std::string& code) {
  const std::string c = upper(trimmed(code));
  if (c == "TS") return StormNature::tropical;
  if (c == "ET") return StormNature::extratropical;
  return StormNature::other;
}

}  // namespace

IbtracsResult parse_ibtracs_csv(std::string_view text,
                                const IbtracsOptions& options) {
  IbtracsResult result;
  std::map<std::string, std::size_t> track_of;

  std::size_t pos = 0;
  bool have_header = false;
  bool first_data_row = true;
  Columns cols;

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    auto cells = split_csv_row(line);
    if (!have_header) {
      cols = find_columns(cells, options.agency);
      have_header = true;
      continue;
    }

    auto cell = [&cells](int i) -> std::string {
      return (i >= 0 && static_cast<std::size_t>(i) < cells.size())
                 ? trimmed(cells[i])
                 : std::string();
    };

    const std::string sid = cell(cols.sid);
    std::int64_t when = 0;
    const bool time_ok = try_parse_time_utc(cell(cols.iso_time), when);
    const auto lat = parse_number(cell(cols.lat));
    const auto lon = parse_number(cell(cols.lon));

    if (sid.empty() || !time_ok || !lat || !lon || std::abs(*lat) > 90.0) {
      // IBTrACS files put a units row right below the header; it is part
      // of the format, not a data defect.
      if (first_data_row && !time_ok) {
        first_data_row = false;
        continue;
      }
      first_data_row = false;
      ++result.skipped_rows;
      continue;
    }
    first_data_row = false;

    if (!six_hour_aligned(when)) {
      ++result.dropped_off_synoptic;
      continue;
    }

    ObservedTrackPoint point;
    point.time = when;
    point.lat = *lat;
    point.lon = wrap_lon(*lon);
    if (auto w = parse_number(cell(cols.wind))) point.max_wind = *w * kKnotsToMs;
    if (auto p = parse_number(cell(cols.pres))) point.min_pressure = *p;
    point.nature = nature_of(cell(cols.nature));

    auto [it, inserted] = track_of.emplace(sid, result.tracks.size());
    if (inserted) {
      ObservedTrack track;
      track.sid = sid;
      track.name = cell(cols.name);
      result.tracks.push_back(std::move(track));
    }
    result.tracks[it->second].points.push_back(point);
  }

  if (!have_header) throw DataError("best track CSV has no header row");

  for (ObservedTrack& track : result.tracks) {
    std::stable_sort(track.points.begin(), track.points.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    std::vector<ObservedTrackPoint> unique;
    unique.reserve(track.points.size());
    for (const auto& p : track.points) {
      if (!unique.empty() && unique.back().time == p.time) {
        ++result.skipped_rows;
        continue;
      }
      if (!unique.empty() && p.time - unique.back().time > 6 * 3600)
        track.has_gaps = true;
      unique.push_back(p);
    }
    track.points = std::move(unique);
  }
  return result;
}

}  // namespace squall
