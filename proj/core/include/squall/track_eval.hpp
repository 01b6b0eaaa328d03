#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squall/best_track.hpp"
#include "squall/tracker.hpp"

namespace squall {

struct TrackSample {
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> msl_hpa;
  std::optional<double> max_ws10;
};

struct MatchedPair {
  int lead_hours = 0;
  TrackSample forecast;
  TrackSample reference;
};

struct MatchedSeries {
  std::string sid;
  std::vector<MatchedPair> pairs;  // unique, increasing lead_hours
  int unmatched_forecast = 0;      // forecast fixes with no reference
  int unmatched_reference = 0;     // reference fixes in range but unmatched
};

/// Intersects on valid time (forecast init_time + lead). Disjoint ranges
/// give an empty series.
MatchedSeries pair_tracks(const TCTrack& forecast,
                          const ObservedTrack& reference);
MatchedSeries pair_tracks(const TCTrack& forecast, const TCTrack& reference);

/// Mean great-circle separation of paired centres at one lead time, km.
/// Absent when the collection holds no pair there.
std::optional<double> track_mae(std::span<const MatchedSeries> collection,
                                int lead_hours);

enum class IntensityMetric { msl_center, max_ws10 };

/// Root-mean-square difference of the chosen intensity over pairs where
/// both sides carry it. Absent when no such pair exists.
std::optional<double> intensity_rmse(std::span<const MatchedSeries> collection,
                                     int lead_hours, IntensityMetric metric);

struct TrackEvalRow {
  int lead_hours = 0;
  int n_pairs = 0;
  std::optional<double> track_mae_km;
  std::optional<double> rmse_msl_hpa;
  std::optional<double> rmse_ws10_ms;
};

/// One row per lead time present anywhere in the collection, ascending.
std::vector<TrackEvalRow> evaluate_tracks(
    std::span<const MatchedSeries> collection);

/// Columns: lead_hours,n_pairs,track_mae_km,rmse_msl_hpa,rmse_ws10_ms.
/// Values print with %.17g; absent values leave the cell empty.
std::string track_eval_csv(std::span<const TrackEvalRow> rows);

}  // namespace squall
