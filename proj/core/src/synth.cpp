#include "squall/synth.hpp"

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "fft_util.hpp"
#include "squall/error.hpp"
#include "squall/rng.hpp"

namespace squall {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

/// Grid spacing in km of the flat torus used for spectral synthesis.
double torus_spacing_km(const GridSpec& grid) {
  return grid.lat_step * kDegToRad * grid.earth_radius_km;
}

/// Angular wavenumber (rad/km) of mode (sy, sx) in signed frequency index.
double mode_wavenumber(int sy, int sx, int n0, int n1, double d_km) {
  const double fy = sy / (n0 * d_km);
  const double fx = sx / (n1 * d_km);
  return 2.0 * kPi * std::hypot(fy, fx);
}

int signed_freq(int i, int n) { return i <= n / 2 ? i : i - n; }

bool grid_contains(const GridSpec& grid, LatLon p) {
  if (p.lat > grid.lat(0) || p.lat < grid.lat(grid.nlat - 1)) return false;
  if (grid.global_lon()) return true;
  const double span = (grid.nlon - 1) * grid.lon_step;
  return wrap_lon(p.lon - grid.lon_start) <= span + 1e-9;
}

}  // namespace

void VortexSpec::validate() const {
  if (!(r_max_km > 0.0) || !(v_max >= 0.0) || !(depth >= 0.0) ||
      !(ambient_msl > 0.0) || std::abs(center.lat) > 90.0 ||
      !std::isfinite(u_steer) || !std::isfinite(v_steer))
    throw DataError("vortex spec out of range");
}

Field gaussian_random_field(const GridSpec& grid, double correlation_length_km,
                            std::uint64_t seed) {
  grid.validate();
  if (!(correlation_length_km > 0.0))
    throw DataError("correlation length must be positive");

  const int n0 = grid.nlat, n1 = grid.nlon;
  const std::size_t n = grid.size();
  const double d_km = torus_spacing_km(grid);
  const double l2 = correlation_length_km * correlation_length_km;

  std::vector<double> amp(n, 0.0);
  double total = 0.0;
  for (int iy = 0; iy < n0; ++iy) {
    const int sy = signed_freq(iy, n0);
    for (int ix = 0; ix < n1; ++ix) {
      if (iy == 0 && ix == 0) continue;
      const double k = mode_wavenumber(sy, signed_freq(ix, n1), n0, n1, d_km);
      const double s = std::exp(-0.5 * k * k * l2);
      amp[static_cast<std::size_t>(iy) * n1 + ix] = s;
      total += s;
    }
  }
  if (!(total > 0.0))
    throw NumericError("correlation length is too long for this grid");

  // Fixed amplitudes A with sum A^2 = N^2 and random phases: the inverse
  // transform then has population mean 0 and population variance 1 exactly.
  const double scale = static_cast<double>(n) / std::sqrt(total);
  std::vector<std::complex<double>> spectrum(n);
  Rng rng(seed);
  for (int iy = 0; iy < n0; ++iy) {
    const int jy = (n0 - iy) % n0;
    for (int ix = 0; ix < n1; ++ix) {
      if (iy == 0 && ix == 0) continue;
      const int jx = (n1 - ix) % n1;
      const std::size_t m = static_cast<std::size_t>(iy) * n1 + ix;
      const std::size_t c = static_cast<std::size_t>(jy) * n1 + jx;
      if (m == c) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        spectrum[m] = sign * scale * std::sqrt(amp[m]);
      } else if (m < c) {
        const double a = scale * std::sqrt(amp[m]);
        spectrum[m] = std::polar(a, 2.0 * kPi * rng.uniform());
        spectrum[c] = std::conj(spectrum[m]);
      }
    }
  }

  auto values = fft::inverse2d_real(std::move(spectrum), n0, n1);
  return Field(grid, std::nullopt, "", std::move(values));
}

FieldSet synthetic_vortex(const GridSpec& grid, const VortexSpec& spec,
                          std::int64_t valid_time, int lead_hours) {
  grid.validate();
  spec.validate();
  if (!grid_contains(grid, spec.center))
    throw DataError("vortex centre is outside the grid");

  const int n0 = grid.nlat, n1 = grid.nlon;
  const std::size_t n = grid.size();
  const double radius = grid.earth_radius_km;
  const double cos_c = std::cos(spec.center.lat * kDegToRad);

  std::vector<double> dx(n1), dy(n0);
  for (int j = 0; j < n1; ++j)
    dx[j] = lon_difference(grid.lon(j), spec.center.lon) * kDegToRad * radius *
            cos_c;
  for (int i = 0; i < n0; ++i)
    dy[i] = (grid.lat(i) - spec.center.lat) * kDegToRad * radius;

  std::vector<double> msl(n), u_tan(n), v_tan(n), bump(n);
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const std::size_t idx = static_cast<std::size_t>(i) * n1 + j;
      const double r = std::hypot(dx[j], dy[i]);
      const double shape = std::exp(-r / spec.r_max_km);
      msl[idx] = spec.ambient_msl - spec.depth * shape;
      bump[idx] = shape;
      if (r > 0.0) {
        const double vt = r <= spec.r_max_km ? spec.v_max * r / spec.r_max_km
                                             : spec.v_max * spec.r_max_km / r;
        u_tan[idx] = -vt * dy[i] / r;
        v_tan[idx] = vt * dx[j] / r;
      }
    }
  }

  FieldSet out;
  out.valid_time = valid_time;
  out.lead_hours = lead_hours;
  out.insert(Field(grid, VariableId::surface(VarName::MSL), "hPa", msl));
  out.insert(Field(grid, VariableId::surface(VarName::U10), "m s**-1", u_tan));
  out.insert(Field(grid, VariableId::surface(VarName::V10), "m s**-1", v_tan));

  // The cyclonic circulation is strongest at low levels and gone at 200 hPa,
  // so |zeta850| carries the full Rankine core vorticity while the mean of
  // the four level winds at the exact centre is the steering alone.
  const std::pair<int, double> level_weight[] = {
      {850, 1.0}, {700, 0.6}, {500, 0.3}, {200, 0.0}};
  for (const auto& [level, w] : level_weight) {
    std::vector<double> u(n), v(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
      u[idx] = spec.u_steer + w * u_tan[idx];
      v[idx] = spec.v_steer + w * v_tan[idx];
    }
    out.insert(Field(grid, VariableId::upper(VarName::U, level), "m s**-1",
                     std::move(u)));
    out.insert(Field(grid, VariableId::upper(VarName::V, level), "m s**-1",
                     std::move(v)));
  }

  // Warm core: raised 200 hPa heights over lowered 850 hPa heights give the
  // thickness a strict maximum at the centre gridpoint.
  std::vector<double> z200(n), z850(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    z200[idx] = 11800.0 + 40.0 * bump[idx];
    z850[idx] = 1450.0 - 20.0 * bump[idx];
  }
  out.insert(
      Field(grid, VariableId::upper(VarName::Z, 200), "gpm", std::move(z200)));
  out.insert(
      Field(grid, VariableId::upper(VarName::Z, 850), "gpm", std::move(z850)));
  return out;
}

AdvectedVortex advect_sequence(const GridSpec& grid, const VortexSpec& spec,
                               int steps, double dt_seconds) {
  grid.validate();
  spec.validate();
  if (steps < 0) throw DataError("advection needs a non-negative step count");
  const double hours = dt_seconds / 3600.0;
  const int lead_step = static_cast<int>(std::lround(hours));
  if (lead_step <= 0 || std::abs(hours - lead_step) > 1e-9)
    throw DataError("advection step must be a whole number of hours");

  AdvectedVortex out;
  LatLon c = spec.center;
  for (int k = 0; k <= steps; ++k) {
    if (!grid_contains(grid, c)) {
      out.truncated = true;
      break;
    }
    VortexSpec step_spec = spec;
    step_spec.center = c;
    out.fields.push_back(synthetic_vortex(
        grid, step_spec, static_cast<std::int64_t>(k) * lead_step * 3600,
        k * lead_step));
    out.centers.push_back(c);
    if (k == steps) break;

    const double north_km = spec.v_steer * dt_seconds / 1000.0;
    const double east_km = spec.u_steer * dt_seconds / 1000.0;
    if (east_km != 0.0 && std::abs(c.lat) > 89.5)
      throw NumericError(
          "advection is undefined within half a degree of a pole");
    const double cos_lat = std::cos(c.lat * kDegToRad);
    c.lat += north_km / grid.earth_radius_km / kDegToRad;
    c.lon = wrap_lon(c.lon +
                     east_km / (grid.earth_radius_km * cos_lat) / kDegToRad);
  }
  return out;
}

Field degrade(const Field& field, double strength) {
  if (!(strength >= 0.0))
    throw DataError("degrade strength must be non-negative");
  if (field.has_mask()) throw DataError("degrade needs an unmasked field");
  if (strength == 0.0) return field;

  const GridSpec& grid = field.grid();
  const int n0 = grid.nlat, n1 = grid.nlon;
  const double d_km = torus_spacing_km(grid);
  const double s2 = strength * strength;

  auto spectrum = fft::forward2d(field.values().data(), n0, n1);
  for (int iy = 0; iy < n0; ++iy) {
    const int sy = signed_freq(iy, n0);
    for (int ix = 0; ix < n1; ++ix) {
      const double k = mode_wavenumber(sy, signed_freq(ix, n1), n0, n1, d_km);
      spectrum[static_cast<std::size_t>(iy) * n1 + ix] *=
          std::exp(-0.5 * k * k * s2);
    }
  }
  auto values = fft::inverse2d_real(std::move(spectrum), n0, n1);
  return Field(grid, field.var(), field.units(), std::move(values));
}

}  // namespace squall
