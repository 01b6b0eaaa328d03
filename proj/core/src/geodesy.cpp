#include "squall/geodesy.hpp"

#include <algorithm>
#include <cmath>

#include "squall/error.hpp"

namespace squall {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;
}  // namespace

double great_circle_km(LatLon a, LatLon b, double radius_km) {
  if (std::abs(a.lat) > 90.0 || std::abs(b.lat) > 90.0)
    throw DataError("latitude outside [-90, 90]");
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlam = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlam / 2);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  const double c = 2.0 * std::asin(std::min(1.0, std::sqrt(h)));
  return radius_km * c;
}

double wrap_lon(double lon_deg) {
  double w = std::fmod(lon_deg, 360.0);
  if (w < 0) w += 360.0;
  return w;
}

double lon_difference(double a_deg, double b_deg) {
  double d = std::fmod(a_deg - b_deg, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

GridIndex nearest_index(const GridSpec& grid, LatLon p) {
  grid.validate();
  int i = static_cast<int>(std::lround((grid.lat_start - p.lat) / grid.lat_step));
  i = std::clamp(i, 0, grid.nlat - 1);

  const double offset = lon_difference(p.lon, grid.lon_start);
  int j;
  if (grid.global_lon()) {
    j = static_cast<int>(std::lround(wrap_lon(p.lon - grid.lon_start) /
                                     grid.lon_step)) %
        grid.nlon;
  } else {
    j = static_cast<int>(std::lround(offset / grid.lon_step));
    j = std::clamp(j, 0, grid.nlon - 1);
  }
  return {i, j};
}

std::vector<GridIndex> disk_indices(const GridSpec& grid, LatLon center,
                                    double radius_km) {
  grid.validate();
  if (radius_km <= 0) throw DataError("disk radius must be positive");
  std::vector<GridIndex> out;

  // Rows outside the meridional reach of the disk cannot contribute.
  const double dlat_max =
      radius_km / grid.earth_radius_km / kDegToRad + grid.lat_step;
  for (int i = 0; i < grid.nlat; ++i) {
    const double lat = grid.lat(i);
    if (std::abs(lat - center.lat) > dlat_max) continue;
    for (int j = 0; j < grid.nlon; ++j) {
      const LatLon p{lat, grid.lon(j)};
      if (great_circle_km(p, center, grid.earth_radius_km) <= radius_km)
        out.push_back({i, j});
    }
  }
  return out;
}

}  // namespace squall
