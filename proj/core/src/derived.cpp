#include "squall/derived.hpp"

#include <cmath>

#include "squall/error.hpp"

namespace squall {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

void require_same_grid(const Field& a, const Field& b, const char* op) {
  if (!(a.grid() == b.grid()))
    throw DataError(std::string(op) + ": fields are on different grids");
}

bool same_level(const Field& a, const Field& b) {
  if (!a.var() || !b.var()) return true;  // untagged inputs are not checked
  return a.var()->level == b.var()->level;
}

}  // namespace

Field wind_speed(const Field& u, const Field& v) {
  require_same_grid(u, v, "wind_speed");
  if (!same_level(u, v))
    throw DataError("wind_speed: u and v are on different levels");
  std::vector<double> out(u.grid().size());
  const auto us = u.values();
  const auto vs = v.values();
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = std::hypot(us[n], vs[n]);

  std::optional<VariableId> var;
  if (u.var() && v.var() && u.var()->name == VarName::U10 &&
      v.var()->name == VarName::V10) {
    var = VariableId::surface(VarName::WS10);
  }
  return Field(u.grid(), var, "m s-1", std::move(out));
}

Field relative_vorticity(const Field& u, const Field& v) {
  require_same_grid(u, v, "relative_vorticity");
  if (!same_level(u, v))
    throw DataError("relative_vorticity: u and v are on different levels");
  const GridSpec& g = u.grid();
  if (g.nlat < 3)
    throw DataError("relative_vorticity requires at least 3 latitude rows");

  const double radius_m = g.earth_radius_km * 1000.0;
  const double dlam = g.lon_step * kDegToRad;
  const double dphi = g.lat_step * kDegToRad;
  const bool wrap = g.global_lon();

  const auto us = u.values();
  const auto vs = v.values();
  const int nlat = g.nlat, nlon = g.nlon;
  std::vector<double> zeta(g.size());

  auto at = [&](std::span<const double> a, int i, int j) {
    return a[static_cast<std::size_t>(i) * nlon + j];
  };

  for (int i = 0; i < nlat; ++i) {
    const double coslat = std::cos(g.lat(i) * kDegToRad);
    const double dx = radius_m * coslat * dlam;
    const double dy = radius_m * dphi;
    for (int j = 0; j < nlon; ++j) {
      // dv/dx, periodic or one-sided in longitude
      double dvdx;
      if (wrap) {
        const int jl = (j - 1 + nlon) % nlon, jr = (j + 1) % nlon;
        dvdx = (at(vs, i, jr) - at(vs, i, jl)) / (2.0 * dx);
      } else if (j == 0) {
        dvdx = (at(vs, i, 1) - at(vs, i, 0)) / dx;
      } else if (j == nlon - 1) {
        dvdx = (at(vs, i, j) - at(vs, i, j - 1)) / dx;
      } else {
        dvdx = (at(vs, i, j + 1) - at(vs, i, j - 1)) / (2.0 * dx);
      }

      // du/dy; row index grows southward, so north is i-1.
      double dudy;
      if (i == 0) {
        dudy = (at(us, 0, j) - at(us, 1, j)) / dy;
      } else if (i == nlat - 1) {
        dudy = (at(us, i - 1, j) - at(us, i, j)) / dy;
      } else {
        dudy = (at(us, i - 1, j) - at(us, i + 1, j)) / (2.0 * dy);
      }

      zeta[static_cast<std::size_t>(i) * nlon + j] = dvdx - dudy;
    }
  }
  return Field(g, std::nullopt, "s-1", std::move(zeta));
}

Field thickness(const Field& z_top, const Field& z_bottom) {
  require_same_grid(z_top, z_bottom, "thickness");
  std::vector<double> out(z_top.grid().size());
  const auto a = z_top.values();
  const auto b = z_bottom.values();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = a[n] - b[n];
  return Field(z_top.grid(), std::nullopt, z_top.units(), std::move(out));
}

}  // namespace squall
