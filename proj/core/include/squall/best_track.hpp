#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squall {

enum class StormNature { tropical, extratropical, other };

struct ObservedTrackPoint {
  std::int64_t time = 0;  // epoch seconds UTC, 6-hour synoptic
  double lat = 0.0;
  double lon = 0.0;  // [0, 360)
  std::optional<double> max_wind;      // m s-1
  std::optional<double> min_pressure;  // hPa
  StormNature nature = StormNature::other;
};

struct ObservedTrack {
  std::string sid;
  std::string name;  // empty when the NAME column is absent
  std::vector<ObservedTrackPoint> points;  // strictly increasing times
  bool has_gaps = false;  // true when consecutive points are > 6 h apart
};

struct IbtracsOptions {
  /// Which agency's wind/pressure columns define intensity.
  enum class Agency { wmo, usa };
  Agency agency = Agency::wmo;
};

struct IbtracsResult {
  std::vector<ObservedTrack> tracks;  // in order of first appearance
  int dropped_off_synoptic = 0;  // rows not on the 00/06/12/18 UTC cycle
  int skipped_rows = 0;          // rows with unparseable mandatory cells
};

/// Parses an IBTrACS v04-style CSV. The header row must name SID, ISO_TIME,
/// LAT and LON (any order, any case); a units row directly after the header
/// is recognised and ignored. Wind columns are in knots and converted to
/// m s-1. Throws DataError when a mandatory column is missing.
IbtracsResult parse_ibtracs_csv(std::string_view text,
                                const IbtracsOptions& options = {});

}  // namespace squall
