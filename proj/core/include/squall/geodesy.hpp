#pragma once

#include <compare>
#include <vector>

#include "squall/grid.hpp"

namespace squall {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct GridIndex {
  int i = 0;
  int j = 0;
  auto operator<=>(const GridIndex&) const = default;
};

inline constexpr double kEarthRadiusKm = 6371.0;

/// Haversine great-circle distance in kilometres.
double great_circle_km(LatLon a, LatLon b, double radius_km = kEarthRadiusKm);

/// Wrap to [0, 360).
double wrap_lon(double lon_deg);

/// Signed smallest difference a - b in (-180, 180].
double lon_difference(double a_deg, double b_deg);

/// Grid point nearest to the given position. Longitude wraps on global
/// grids and clamps on regional ones; latitude always clamps.
GridIndex nearest_index(const GridSpec& grid, LatLon p);

/// All grid points whose great-circle distance to `center` is <= radius_km,
/// in row-major order. Handles longitude wraparound and polar caps.
std::vector<GridIndex> disk_indices(const GridSpec& grid, LatLon center,
                                    double radius_km);

}  // namespace squall
