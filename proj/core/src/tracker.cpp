#include "squall/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "squall/derived.hpp"
#include "squall/error.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = 180.0 / kPi;

double to_hpa(double value, const std::string& units) {
  return units == "Pa" ? value / 100.0 : value;
}

std::size_t flat(const GridSpec& g, GridIndex ix) {
  return static_cast<std::size_t>(ix.i) * g.nlon + ix.j;
}

/// Existing 8-neighbourhood of (i, j); longitude wraps on global grids.
int neighbours(const GridSpec& g, int i, int j, GridIndex out[8]) {
  const bool wrap = g.global_lon();
  int n = 0;
  for (int di = -1; di <= 1; ++di) {
    const int ni = i + di;
    if (ni < 0 || ni >= g.nlat) continue;
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      int nj = j + dj;
      if (nj < 0 || nj >= g.nlon) {
        if (!wrap) continue;
        nj = (nj + g.nlon) % g.nlon;
      }
      out[n++] = GridIndex{ni, nj};
    }
  }
  return n;
}

bool strict_extremum(const Field& f, GridIndex ix, int sign) {
  GridIndex nb[8];
  const int n = neighbours(f.grid(), ix.i, ix.j, nb);
  const double v = f.at(ix.i, ix.j);
  for (int k = 0; k < n; ++k) {
    if (!f.valid_at(nb[k].i, nb[k].j)) continue;
    if (sign * (v - f.at(nb[k].i, nb[k].j)) <= 0.0) return false;
  }
  return true;
}

const VariableId kMsl = VariableId::surface(VarName::MSL);
const VariableId kWs10 = VariableId::surface(VarName::WS10);
const VariableId kU10 = VariableId::surface(VarName::U10);
const VariableId kV10 = VariableId::surface(VarName::V10);
const VariableId kU850 = VariableId::upper(VarName::U, 850);
const VariableId kV850 = VariableId::upper(VarName::V, 850);
const VariableId kZ850 = VariableId::upper(VarName::Z, 850);
const VariableId kZ200 = VariableId::upper(VarName::Z, 200);

/// Per-step diagnostics shared by every candidate test at that step.
struct StepDerived {
  const Field* msl = nullptr;
  Field ws10;
  Field zeta850;
  std::optional<Field> warm_core;  // z200 - z850

  static StepDerived build(const FieldSet& fields, bool need_warm_core) {
    StepDerived d;
    d.msl = &fields.at(kMsl);
    const Field* ws = fields.find(kWs10);
    d.ws10 = ws ? *ws : wind_speed(fields.at(kU10), fields.at(kV10));
    d.zeta850 = relative_vorticity(fields.at(kU850), fields.at(kV850));
    if (need_warm_core)
      d.warm_core = thickness(fields.at(kZ200), fields.at(kZ850));
    return d;
  }
};

ConditionReport check_candidate(GridIndex cand, const StepDerived& d,
                                const StaticFields& statics,
                                bool extratropical,
                                const TrackerConfig& cfg) {
  const GridSpec& grid = d.msl->grid();
  const LatLon center{grid.lat(cand.i), grid.lon(cand.j)};
  const auto disk = disk_indices(grid, center, cfg.condition_radius_km);

  double max_wind = -std::numeric_limits<double>::infinity();
  double max_zeta = 0.0;
  bool warm_core_max = false;
  for (GridIndex ix : disk) {
    if (d.ws10.valid_at(ix.i, ix.j))
      max_wind = std::max(max_wind, d.ws10.at(ix.i, ix.j));
    if (d.zeta850.valid_at(ix.i, ix.j))
      max_zeta = std::max(max_zeta, std::abs(d.zeta850.at(ix.i, ix.j)));
    if (d.warm_core && d.warm_core->valid_at(ix.i, ix.j) &&
        strict_extremum(*d.warm_core, ix, +1))
      warm_core_max = true;
  }

  ConditionReport r;
  r.wind_required = statics.land_sea_mask.at(cand.i, cand.j) >= 0.5;
  r.wind_ok = max_wind > cfg.ws10_threshold_ms;
  r.vorticity_ok = max_zeta >= cfg.vorticity_threshold;
  r.thickness_required = extratropical;
  r.thickness_ok = warm_core_max;
  return r;
}

TCPoint make_point(const FieldSet& fields, const StepDerived& d, GridIndex ix,
                   const TrackerConfig& cfg) {
  const GridSpec& grid = fields.grid();
  TCPoint p;
  p.lead_hours = fields.lead_hours;
  p.lat = grid.lat(ix.i);
  p.lon = grid.lon(ix.j);
  p.msl_center = to_hpa(d.msl->at(ix.i, ix.j), d.msl->units());

  const auto disk = disk_indices(grid, LatLon{p.lat, p.lon},
                                 cfg.condition_radius_km);
  double max_wind = 0.0, max_zeta = 0.0;
  for (GridIndex n : disk) {
    if (d.ws10.valid_at(n.i, n.j))
      max_wind = std::max(max_wind, d.ws10.at(n.i, n.j));
    if (d.zeta850.valid_at(n.i, n.j))
      max_zeta = std::max(max_zeta, std::abs(d.zeta850.at(n.i, n.j)));
  }
  p.max_ws10 = max_wind;
  p.vorticity_850 = max_zeta;
  return p;
}

}  // namespace

void TrackerConfig::validate() const {
  if (search_radius_km <= 0 || condition_radius_km <= 0 ||
      ws10_threshold_ms <= 0 || vorticity_threshold <= 0 ||
      terrain_limit_m <= 0 || dt_hours <= 0)
    throw DataError("tracker config values must be positive");
  if (steering_levels.empty())
    throw DataError("tracker config needs at least one steering level");
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::end_of_forecast: return "end_of_forecast";
    case Termination::no_candidate: return "no_candidate";
    case Termination::high_terrain: return "high_terrain";
  }
  return "unknown";
}

std::vector<LocalMinimum> find_local_minima(
    const Field& field, std::span<const GridIndex> region) {
  std::vector<LocalMinimum> minima;
  for (GridIndex ix : region) {
    if (!field.valid_at(ix.i, ix.j)) continue;
    if (strict_extremum(field, ix, -1))
      minima.push_back({ix, field.at(ix.i, ix.j)});
  }
  const GridSpec& g = field.grid();
  std::sort(minima.begin(), minima.end(),
            [&g](const LocalMinimum& a, const LocalMinimum& b) {
              if (a.value != b.value) return a.value < b.value;
              return flat(g, a.index) < flat(g, b.index);
            });
  return minima;
}

std::optional<TCPoint> first_guess(const FieldSet& analysis, LatLon observed,
                                   const TrackerConfig& cfg) {
  cfg.validate();
  const Field& msl = analysis.at(kMsl);
  const auto disk =
      disk_indices(analysis.grid(), observed, cfg.search_radius_km);

  std::optional<GridIndex> best;
  double best_value = 0.0;
  for (GridIndex ix : disk) {
    if (!msl.valid_at(ix.i, ix.j)) continue;
    const double v = msl.at(ix.i, ix.j);
    if (!best || v < best_value) {
      best = ix;
      best_value = v;
    }
  }
  if (!best) return std::nullopt;
  const StepDerived d = StepDerived::build(analysis, false);
  return make_point(analysis, d, *best, cfg);
}

Displacement steering_displacement(const FieldSet& fields, LatLon position,
                                   const TrackerConfig& cfg) {
  cfg.validate();
  if (std::abs(position.lat) >= 89.5)
    throw NumericError(
        "steering displacement is undefined within half a degree of a pole");

  const GridIndex at = nearest_index(fields.grid(), position);
  double u = 0.0, v = 0.0;
  for (int level : cfg.steering_levels) {
    u += fields.at(VariableId::upper(VarName::U, level)).at(at.i, at.j);
    v += fields.at(VariableId::upper(VarName::V, level)).at(at.i, at.j);
  }
  u /= static_cast<double>(cfg.steering_levels.size());
  v /= static_cast<double>(cfg.steering_levels.size());

  const double dt = cfg.dt_hours * 3600.0;
  const double radius_m = fields.grid().earth_radius_km * 1000.0;
  Displacement disp;
  disp.dlat = v * dt / radius_m * kDeg;
  disp.dlon = u * dt / (radius_m * std::cos(position.lat / kDeg)) * kDeg;
  return disp;
}

LatLon estimate_next_position(const TCTrack& track, const FieldSet& fields,
                              const TrackerConfig& cfg) {
  if (track.points.empty())
    throw DataError("cannot extend an empty track");
  const TCPoint& cur = track.points.back();
  const Displacement steer =
      steering_displacement(fields, LatLon{cur.lat, cur.lon}, cfg);

  double dlat = steer.dlat;
  double dlon = steer.dlon;
  if (track.points.size() >= 2) {
    const TCPoint& prev = track.points[track.points.size() - 2];
    // Carry the previous displacement across on the tangent plane: eastward
    // arc at the previous latitude, re-expressed at the current one.
    const double east_arc = lon_difference(cur.lon, prev.lon) *
                            std::cos(prev.lat / kDeg);
    const double extrap_lat = cur.lat - prev.lat;
    const double extrap_lon = east_arc / std::cos(cur.lat / kDeg);
    dlat = 0.5 * (dlat + extrap_lat);
    dlon = 0.5 * (dlon + extrap_lon);
  }
  return LatLon{cur.lat + dlat, wrap_lon(cur.lon + dlon)};
}

ConditionReport candidate_valid(GridIndex candidate, const FieldSet& fields,
                                const StaticFields& statics,
                                bool extratropical,
                                const TrackerConfig& cfg) {
  cfg.validate();
  statics.validate();
  if (!(statics.orography.grid() == fields.grid()))
    throw DataError("static fields are on a different grid than the forecast");
  const StepDerived d = StepDerived::build(fields, extratropical);
  return check_candidate(candidate, d, statics, extratropical, cfg);
}

TCTrack track_tc(std::span<const FieldSet> forecast, LatLon observed_init,
                 const StaticFields& statics,
                 const std::map<std::int64_t, bool>* extratropical_by_time,
                 const TrackerConfig& cfg, std::string sid) {
  cfg.validate();
  statics.validate();
  if (forecast.empty())
    throw DataError("tracker needs the lead-0 analysis field set");
  if (forecast.front().lead_hours != 0)
    throw DataError("tracker forecast must start at lead 0");
  for (std::size_t k = 0; k < forecast.size(); ++k) {
    forecast[k].validate();
    if (!(forecast[k].grid() == statics.orography.grid()))
      throw DataError("static fields are on a different grid than the forecast");
    if (k > 0 && forecast[k].lead_hours !=
                     forecast[k - 1].lead_hours + cfg.dt_hours)
      throw DataError("tracker forecast lead times must advance by one step");
  }

  TCTrack track;
  track.sid = std::move(sid);
  track.init_time = forecast.front().valid_time;
  track.termination = Termination::no_candidate;

  auto guess = first_guess(forecast.front(), observed_init, cfg);
  if (!guess) return track;
  track.points.push_back(*guess);
  track.termination = Termination::end_of_forecast;

  for (std::size_t k = 1; k < forecast.size(); ++k) {
    const FieldSet& step = forecast[k];
    const LatLon estimate = estimate_next_position(track, step, cfg);

    bool extratropical = false;
    if (extratropical_by_time) {
      auto it = extratropical_by_time->find(step.valid_time);
      if (it != extratropical_by_time->end()) extratropical = it->second;
    }

    const StepDerived d = StepDerived::build(step, extratropical);
    const auto disk =
        disk_indices(step.grid(), estimate, cfg.search_radius_km);
    const auto minima = find_local_minima(*d.msl, disk);

    const GridSpec& grid = step.grid();
    std::optional<GridIndex> chosen;
    double chosen_km = 0.0;
    for (const LocalMinimum& m : minima) {
      if (!check_candidate(m.index, d, statics, extratropical, cfg).passed())
        continue;
      const double km = great_circle_km(
          estimate, LatLon{grid.lat(m.index.i), grid.lon(m.index.j)},
          grid.earth_radius_km);
      if (!chosen || km < chosen_km) {
        chosen = m.index;
        chosen_km = km;
      }
    }
    if (!chosen) {
      track.termination = Termination::no_candidate;
      break;
    }
    if (statics.orography.at(chosen->i, chosen->j) > cfg.terrain_limit_m) {
      track.termination = Termination::high_terrain;
      break;
    }
    track.points.push_back(make_point(step, d, *chosen, cfg));
  }
  return track;
}

std::string track_json(const TCTrack& track) {
  nlohmann::ordered_json j;
  j["sid"] = track.sid;
  j["init_time"] = format_time_utc(track.init_time);
  j["termination"] = termination_name(track.termination);
  j["points"] = nlohmann::ordered_json::array();
  for (const TCPoint& p : track.points) {
    nlohmann::ordered_json o;
    o["lead_h"] = p.lead_hours;
    o["lat"] = p.lat;
    o["lon"] = p.lon;
    o["msl_hpa"] = p.msl_center;
    o["max_ws10_ms"] = p.max_ws10;
    j["points"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

}  // namespace squall
