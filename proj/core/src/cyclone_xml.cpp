#include "squall/cyclone_xml.hpp"

#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "squall/error.hpp"
#include "squall/geodesy.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

namespace pt = boost::property_tree;

std::optional<double> node_number(const pt::ptree& parent, const char* path) {
  auto child = parent.get_child_optional(path);
  if (!child) return std::nullopt;
  try {
    return child->get_value<double>();
  } catch (const pt::ptree_error&) {
    return std::nullopt;
  }
}

std::string node_units(const pt::ptree& parent, const char* path) {
  return parent.get<std::string>(std::string(path) + ".<xmlattr>.units", "");
}

std::optional<double> signed_coordinate(const pt::ptree& fix, const char* path,
                                        const char* negative_suffix) {
  auto value = node_number(fix, path);
  if (!value) return std::nullopt;
  const std::string units = node_units(fix, path);
  if (!units.empty() && units.back() == *negative_suffix) return -*value;
  return value;
}

std::optional<ForecastTrackPoint> parse_fix(const pt::ptree& fix) {
  ForecastTrackPoint p;
  auto time_text = fix.get_optional<std::string>("validTime");
  if (!time_text || !try_parse_time_utc(*time_text, p.valid_time))
    return std::nullopt;

  const auto lat = signed_coordinate(fix, "latitude", "S");
  const auto lon = signed_coordinate(fix, "longitude", "W");
  if (!lat || !lon || std::abs(*lat) > 90.0) return std::nullopt;
  p.lat = *lat;
  p.lon = wrap_lon(*lon);

  if (auto v = node_number(fix, "cycloneData.minimumPressure.pressure")) {
    const std::string u =
        fix.get<std::string>("cycloneData.minimumPressure.pressure.<xmlattr>.units", "hPa");
    p.pressure_hpa = (u == "Pa") ? *v / 100.0 : *v;
  }
  if (auto v = node_number(fix, "cycloneData.maximumWind.speed")) {
    const std::string u =
        fix.get<std::string>("cycloneData.maximumWind.speed.<xmlattr>.units", "m/s");
    p.max_wind_ms = (u == "kt") ? *v * 0.514444 : *v;
  }
  return p;
}

}  // namespace

CycloneXmlResult parse_tigge_cyclone_xml(std::string_view text) {
  pt::ptree doc;
  std::istringstream stream{std::string(text)};
  try {
    pt::read_xml(stream, doc, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw DataError("cyclone XML parse failed at line " +
                    std::to_string(e.line()) + ": " + e.message());
  }

  auto root = doc.get_child_optional("cxml");
  if (!root) throw DataError("cyclone XML has no <cxml> root element");

  CycloneXmlResult result;
  for (const auto& [key, data] : *root) {
    if (key != "data") continue;
    const std::string type =
        data.get<std::string>("<xmlattr>.type", "");
    if (type != "forecast") {
      ++result.ignored_data_blocks;
      continue;
    }
    for (const auto& [dkey, dist] : data) {
      if (dkey != "disturbance") continue;
      ForecastTrack track;
      track.disturbance_id = dist.get<std::string>("<xmlattr>.ID", "");
      track.name = dist.get<std::string>("cycloneName", "");
      for (const auto& [fkey, fix] : dist) {
        if (fkey != "fix") continue;
        if (auto point = parse_fix(fix)) {
          track.points.push_back(*point);
        } else {
          ++result.skipped_points;
        }
      }
      result.tracks.push_back(std::move(track));
    }
  }
  return result;
}

}  // namespace squall
