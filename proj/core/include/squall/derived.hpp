#pragma once

#include "squall/grid.hpp"

namespace squall {

/// Pointwise sqrt(u^2 + v^2). Output is tagged WS10 when the inputs are
/// the 10 m wind components, untagged otherwise. Units m s^-1.
Field wind_speed(const Field& u, const Field& v);

/// zeta = dv/dx - du/dy with the spherical metric (dx = R cos(phi) dlam,
/// dy = R dphi), central differences in the interior, one-sided
/// differences at the north/south boundary rows, periodic in longitude
/// on global grids. Requires nlat >= 3. Units s^-1.
Field relative_vorticity(const Field& u, const Field& v);

/// Pointwise z_top - z_bottom on a shared grid.
Field thickness(const Field& z_top, const Field& z_bottom);

}  // namespace squall
