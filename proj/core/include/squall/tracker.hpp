#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squall/geodesy.hpp"
#include "squall/grid.hpp"

namespace squall {

struct TrackerConfig {
  double search_radius_km = 445.0;     // first guess and candidate search
  double condition_radius_km = 278.0;  // vicinity for the Table-style checks
  double ws10_threshold_ms = 8.0;
  double vorticity_threshold = 5e-5;  // s-1, on |zeta_850|
  double terrain_limit_m = 1000.0;
  std::vector<int> steering_levels{200, 500, 700, 850};  // hPa
  int dt_hours = 6;

  void validate() const;
};

struct TCPoint {
  int lead_hours = 0;
  double lat = 0.0;
  double lon = 0.0;
  double msl_center = 0.0;    // hPa
  double max_ws10 = 0.0;      // m s-1, max within condition_radius_km
  double vorticity_850 = 0.0; // s-1, max |zeta| within condition_radius_km
};

enum class Termination { end_of_forecast, no_candidate, high_terrain };

std::string termination_name(Termination t);

struct TCTrack {
  std::string sid;
  std::int64_t init_time = 0;
  std::vector<TCPoint> points;  // lead 0 first-guess point included
  Termination termination = Termination::end_of_forecast;
};

struct LocalMinimum {
  GridIndex index;
  double value = 0.0;
};

/// Strict local minima of `field` among the 8 neighbours (periodic in
/// longitude on global grids; truncated at the polar rows), restricted to
/// `region`. Sorted by value, then row-major index.
std::vector<LocalMinimum> find_local_minima(const Field& field,
                                            std::span<const GridIndex> region);

/// Lowest-valued MSL gridpoint within search_radius_km of the observed
/// position, reported with centre pressure and vicinity maxima. Absent when
/// the search disk contains no usable cell.
std::optional<TCPoint> first_guess(const FieldSet& analysis, LatLon observed,
                                   const TrackerConfig& cfg = {});

/// Mean wind over the steering levels at the gridpoint nearest `position`,
/// integrated over one time step and converted to degrees on the local
/// tangent plane. Returns {dlat, dlon}. Throws NumericError within half a
/// degree of the poles.
struct Displacement {
  double dlat = 0.0;
  double dlon = 0.0;
};
Displacement steering_displacement(const FieldSet& fields, LatLon position,
                                   const TrackerConfig& cfg = {});

/// Next-position estimate: steering alone from a single-point history, the
/// mean of steering and the extrapolated previous displacement otherwise.
LatLon estimate_next_position(const TCTrack& track, const FieldSet& fields,
                              const TrackerConfig& cfg = {});

struct ConditionReport {
  bool wind_required = false;  // candidate gridpoint is land
  bool wind_ok = false;        // max WS10 in vicinity > threshold
  bool vorticity_ok = false;   // max |zeta_850| in vicinity >= threshold
  bool thickness_required = false;  // storm flagged extratropical
  bool thickness_ok = false;  // strict local max of z200-z850 in vicinity

  bool passed() const {
    return (!wind_required || wind_ok) && vorticity_ok &&
           (!thickness_required || thickness_ok);
  }
};

/// Evaluates the candidate checks: near-centre wind (enforced over land
/// only), 850 hPa vorticity, and a warm-core thickness maximum (enforced
/// for extratropical storms only). Throws DataError naming any missing
/// field.
ConditionReport candidate_valid(GridIndex candidate, const FieldSet& fields,
                                const StaticFields& statics,
                                bool extratropical,
                                const TrackerConfig& cfg = {});

/// Walks a forecast, one fix per step: estimate, search the MSL minima
/// within search_radius_km of the estimate, keep the valid candidate
/// closest to the estimate. `forecast` starts with the lead-0 analysis and
/// advances in 6-hour steps. Tracking stops without recording a point when
/// no candidate passes (no_candidate) or the chosen point's orography
/// exceeds the terrain limit (high_terrain).
TCTrack track_tc(std::span<const FieldSet> forecast, LatLon observed_init,
                 const StaticFields& statics,
                 const std::map<std::int64_t, bool>* extratropical_by_time =
                     nullptr,
                 const TrackerConfig& cfg = {}, std::string sid = {});

/// {"sid", "init_time", "termination", "points": [...]} with stable key
/// order; points carry lead_h, lat, lon, msl_hpa, max_ws10_ms.
std::string track_json(const TCTrack& track);

}  // namespace squall
