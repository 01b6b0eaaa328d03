#include "squall/track_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "squall/geodesy.hpp"

namespace squall {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Summed in ascending order so aggregates do not depend on the order the
/// series were supplied in.
double ordered_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

template <typename RefPoint>
MatchedSeries pair_on_time(const TCTrack& forecast,
                           const std::string& ref_sid,
                           const std::map<std::int64_t, RefPoint>& reference,
                           int ref_points_total) {
  MatchedSeries series;
  series.sid = forecast.sid.empty() ? ref_sid : forecast.sid;

  int matched = 0;
  for (const TCPoint& p : forecast.points) {
    const std::int64_t when = forecast.init_time + p.lead_hours * 3600LL;
    auto it = reference.find(when);
    if (it == reference.end()) {
      ++series.unmatched_forecast;
      continue;
    }
    MatchedPair pair;
    pair.lead_hours = p.lead_hours;
    pair.forecast =
        TrackSample{p.lat, p.lon, p.msl_center, p.max_ws10};
    pair.reference = it->second;
    series.pairs.push_back(pair);
    ++matched;
  }
  series.unmatched_reference = ref_points_total - matched;
  return series;
}

struct RefSampleOf {
  TrackSample operator()(const ObservedTrackPoint& p) const {
    return {p.lat, p.lon, p.min_pressure, p.max_wind};
  }
  TrackSample operator()(const TCPoint& p) const {
    return {p.lat, p.lon, p.msl_center, p.max_ws10};
  }
};

}  // namespace

MatchedSeries pair_tracks(const TCTrack& forecast,
                          const ObservedTrack& reference) {
  std::map<std::int64_t, TrackSample> by_time;
  for (const ObservedTrackPoint& p : reference.points)
    by_time.emplace(p.time, RefSampleOf{}(p));
  return pair_on_time(forecast, reference.sid, by_time,
                      static_cast<int>(reference.points.size()));
}

MatchedSeries pair_tracks(const TCTrack& forecast, const TCTrack& reference) {
  std::map<std::int64_t, TrackSample> by_time;
  for (const TCPoint& p : reference.points)
    by_time.emplace(reference.init_time + p.lead_hours * 3600LL,
                    RefSampleOf{}(p));
  return pair_on_time(forecast, reference.sid, by_time,
                      static_cast<int>(reference.points.size()));
}

std::optional<double> track_mae(std::span<const MatchedSeries> collection,
                                int lead_hours) {
  std::vector<double> distances;
  for (const MatchedSeries& s : collection) {
    for (const MatchedPair& p : s.pairs) {
      if (p.lead_hours != lead_hours) continue;
      distances.push_back(great_circle_km(
          LatLon{p.forecast.lat, p.forecast.lon},
          LatLon{p.reference.lat, p.reference.lon}));
    }
  }
  if (distances.empty()) return std::nullopt;
  const auto n = distances.size();
  return ordered_sum(distances) / static_cast<double>(n);
}

std::optional<double> intensity_rmse(std::span<const MatchedSeries> collection,
                                     int lead_hours, IntensityMetric metric) {
  std::vector<double> squares;
  for (const MatchedSeries& s : collection) {
    for (const MatchedPair& p : s.pairs) {
      if (p.lead_hours != lead_hours) continue;
      const auto& fv = metric == IntensityMetric::msl_center
                           ? p.forecast.msl_hpa
                           : p.forecast.max_ws10;
      const auto& rv = metric == IntensityMetric::msl_center
                           ? p.reference.msl_hpa
                           : p.reference.max_ws10;
      if (!fv || !rv) continue;
      const double d = *fv - *rv;
      squares.push_back(d * d);
    }
  }
  if (squares.empty()) return std::nullopt;
  const auto n = squares.size();
  return std::sqrt(ordered_sum(squares) / static_cast<double>(n));
}

std::vector<TrackEvalRow> evaluate_tracks(
    std::span<const MatchedSeries> collection) {
  std::set<int> leads;
  std::map<int, int> counts;
  for (const MatchedSeries& s : collection) {
    for (const MatchedPair& p : s.pairs) {
      leads.insert(p.lead_hours);
      ++counts[p.lead_hours];
    }
  }
  std::vector<TrackEvalRow> rows;
  rows.reserve(leads.size());
  for (int lead : leads) {
    TrackEvalRow row;
    row.lead_hours = lead;
    row.n_pairs = counts[lead];
    row.track_mae_km = track_mae(collection, lead);
    row.rmse_msl_hpa =
        intensity_rmse(collection, lead, IntensityMetric::msl_center);
    row.rmse_ws10_ms =
        intensity_rmse(collection, lead, IntensityMetric::max_ws10);
    rows.push_back(row);
  }
  return rows;
}

std::string track_eval_csv(std::span<const TrackEvalRow> rows) {
  std::string out = "lead_hours,n_pairs,track_mae_km,rmse_msl_hpa,rmse_ws10_ms\n";
  for (const TrackEvalRow& r : rows) {
    out += std::to_string(r.lead_hours) + ',' + std::to_string(r.n_pairs) + ',';
    if (r.track_mae_km) out += g17(*r.track_mae_km);
    out += ',';
    if (r.rmse_msl_hpa) out += g17(*r.rmse_msl_hpa);
    out += ',';
    if (r.rmse_ws10_ms) out += g17(*r.rmse_ws10_ms);
    out += '\n';
  }
  return out;
}

}  // namespace squall
