#pragma once

#include <cstdint>
#include <vector>

#include "squall/geodesy.hpp"
#include "squall/grid.hpp"

namespace squall {

/// Idealized cyclone: Rankine tangential wind (linear inside r_max_km,
/// falling off as 1/r outside) on a uniform steering flow.
struct VortexSpec {
  LatLon center;
  double r_max_km = 50.0;       // radius of maximum wind
  double v_max = 30.0;          // m s**-1, peak tangential wind
  double ambient_msl = 1013.0;  // hPa far from the centre
  double depth = 40.0;          // hPa central pressure deficit
  double u_steer = 0.0;         // m s**-1, uniform environment flow
  double v_steer = 0.0;

  void validate() const;  // throws DataError
};

/// Zero-mean random field with isotropic Gaussian covariance of the given
/// length scale, deterministic per seed. Spectral synthesis with random
/// phases and fixed amplitudes, so every realization has population mean
/// exactly 0 and population variance exactly 1.
Field gaussian_random_field(const GridSpec& grid, double correlation_length_km,
                            std::uint64_t seed);

/// MSL, U10/V10, the four upper-level wind pairs and Z200/Z850 for a vortex
/// at spec.center. MSL has its global minimum, and Z200 - Z850 a strict
/// local maximum, at the gridpoint nearest the centre. The tangential wind
/// is carried at full strength at 850 hPa and fades with height, so the
/// 850 hPa core vorticity is the Rankine value 2 * v_max / r_max while the
/// level-mean wind at the centre equals the steering exactly. Throws
/// DataError when the centre lies outside the grid.
FieldSet synthetic_vortex(const GridSpec& grid, const VortexSpec& spec,
                          std::int64_t valid_time = 0, int lead_hours = 0);

struct AdvectedVortex {
  std::vector<FieldSet> fields;  // one per step, lead 0, dt, 2*dt, ...
  std::vector<LatLon> centers;   // exact centre of each emitted field set
  bool truncated = false;        // centre left the grid before `steps`
};

/// The vortex translated by its steering every dt_seconds, starting from
/// spec.center at lead 0: `steps` translations, steps + 1 field sets.
/// Stops early with truncated = true once the centre leaves the grid.
AdvectedVortex advect_sequence(const GridSpec& grid, const VortexSpec& spec,
                               int steps, double dt_seconds);

/// Gaussian spectral low-pass. `strength` is the smoothing length scale in
/// km; 0 returns the field bit-identical, and the field mean (the DC mode)
/// always passes through unchanged. Requires an unmasked field.
Field degrade(const Field& field, double strength);

}  // namespace squall
