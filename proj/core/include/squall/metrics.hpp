#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "squall/climatology.hpp"
#include "squall/grid.hpp"

namespace squall {

struct ContingencyTable {
  std::int64_t tp = 0;  // event forecast, event observed
  std::int64_t fp = 0;  // event forecast, none observed
  std::int64_t fn = 0;  // none forecast, event observed
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  ContingencyTable& operator+=(const ContingencyTable& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ContingencyTable&) const = default;
};

/// Counts exceedances (value >= threshold) of forecast against truth over
/// the cells that are unmasked everywhere: in both fields, in the threshold
/// field if one is used, and in `mask` (nonzero = keep) if given.
/// Throws DataError on grid mismatch or when every cell is excluded.
ContingencyTable contingency(const Field& forecast, const Field& truth,
                             double threshold, const Field* mask = nullptr);
ContingencyTable contingency(const Field& forecast, const Field& truth,
                             const Field& threshold,
                             const Field* mask = nullptr);

/// TP / (TP + FP + FN); absent when nothing was forecast or observed.
std::optional<double> csi(const ContingencyTable& t);

/// Symmetric extremal dependence index from the hit rate H = TP/(TP+FN) and
/// false alarm rate F = FP/(FP+TN), both clamped into [eps, 1-eps] before
/// the logs; eps defaults to 1/(2 * total). Absent when either marginal is
/// empty.
std::optional<double> sedi(const ContingencyTable& t,
                           std::optional<double> eps = std::nullopt);

/// The same index from pre-computed rates; the caller owns any clamping.
double sedi_from_rates(double hit_rate, double false_alarm_rate);

/// sqrt of the cos(latitude)-weighted mean squared difference.
double latitude_weighted_rmse(const Field& forecast, const Field& truth);

/// cos(latitude)-weighted Pearson correlation of the anomalies
/// (forecast - climatology_mean) and (truth - climatology_mean).
/// Absent when either anomaly has zero weighted variance.
std::optional<double> latitude_weighted_acc(const Field& forecast,
                                            const Field& truth,
                                            const Field& climatology_mean);

struct ThresholdSpec {
  enum class Kind { absolute, percentile };
  Kind kind = Kind::absolute;
  double value = 0.0;  // field units, or the percentile in (0, 100)

  static ThresholdSpec absolute(double v) { return {Kind::absolute, v}; }
  static ThresholdSpec percentile(double p) { return {Kind::percentile, p}; }
  std::string label() const;  // "25" / "13.9" / "p98"
};

/// Six-hour precipitation exceedance levels, mm.
const std::vector<ThresholdSpec>& default_tp_thresholds();
/// Ten-metre wind speed exceedance levels, m s-1.
const std::vector<ThresholdSpec>& default_ws10_thresholds();

struct ScoreRow {
  int lead_hours = 0;
  std::string variable;
  std::string threshold;
  ContingencyTable table;
  std::optional<double> csi;
  std::optional<double> sedi;
};

/// Pools one contingency table per lead time over all initializations
/// (forecasts matched to truths by valid_time), then scores the pooled
/// tables. Climatological thresholds pick the truth-time month/hour slice
/// of `cube`. Throws DataError listing valid times with no matching truth.
std::vector<ScoreRow> score_series(std::span<const FieldSet> forecasts,
                                   std::span<const FieldSet> truths,
                                   const VariableId& variable,
                                   const ThresholdSpec& spec,
                                   const ClimatologyCube* cube = nullptr,
                                   const Field* mask = nullptr);

/// Fixed column order: lead_hours,variable,threshold,tp,fp,fn,tn,csi,sedi.
/// Scores print with %.17g; absent scores leave the cell empty.
std::string scores_csv(std::span<const ScoreRow> rows);
std::string scores_json(std::span<const ScoreRow> rows);

}  // namespace squall
