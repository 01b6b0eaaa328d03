#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace squall {

struct ForecastTrackPoint {
  std::int64_t valid_time = 0;  // epoch seconds UTC
  double lat = 0.0;
  double lon = 0.0;  // [0, 360)
  std::optional<double> pressure_hpa;  // cyclone central pressure
  std::optional<double> max_wind_ms;
};

struct ForecastTrack {
  std::string disturbance_id;
  std::string name;  // cycloneName when present
  std::vector<ForecastTrackPoint> points;
};

struct CycloneXmlResult {
  std::vector<ForecastTrack> tracks;
  int ignored_data_blocks = 0;  // <data> blocks not tagged "forecast"
  int skipped_points = 0;       // fixes with missing or bad coordinates
};

/// Parses the cyclone XML interchange subset: <cxml> holding <data type=...>
/// blocks of <disturbance> tracks made of <fix> points. Only blocks whose
/// type is "forecast" contribute tracks; ensemble-member and analysis blocks
/// are counted and dropped. Latitude/longitude honour their units attribute
/// ("deg N"/"deg S", "deg E"/"deg W"); wind speed in "kt" is converted to
/// m s-1. Throws DataError, naming the position, on malformed XML.
CycloneXmlResult parse_tigge_cyclone_xml(std::string_view text);

}  // namespace squall
