#include "squall/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "squall/error.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CellGate {
  const Field* forecast;
  const Field* truth;
  const Field* threshold;  // may be null
  const Field* mask;       // may be null

  bool open(int i, int j) const {
    if (!forecast->valid_at(i, j) || !truth->valid_at(i, j)) return false;
    if (threshold && !threshold->valid_at(i, j)) return false;
    if (mask && (!mask->valid_at(i, j) || mask->at(i, j) == 0.0)) return false;
    return true;
  }
};

ContingencyTable count_events(const Field& forecast, const Field& truth,
                              const Field* threshold_field,
                              double threshold_scalar, const Field* mask) {
  const GridSpec& g = forecast.grid();
  if (!(truth.grid() == g) || (threshold_field && !(threshold_field->grid() == g)) ||
      (mask && !(mask->grid() == g)))
    throw DataError("contingency fields must share one grid");

  const CellGate gate{&forecast, &truth, threshold_field, mask};
  ContingencyTable t;
  for (int i = 0; i < g.nlat; ++i) {
    for (int j = 0; j < g.nlon; ++j) {
      if (!gate.open(i, j)) continue;
      const double thr =
          threshold_field ? threshold_field->at(i, j) : threshold_scalar;
      const bool f = forecast.at(i, j) >= thr;
      const bool o = truth.at(i, j) >= thr;
      if (f && o)
        ++t.tp;
      else if (f)
        ++t.fp;
      else if (o)
        ++t.fn;
      else
        ++t.tn;
    }
  }
  if (t.total() == 0)
    throw DataError("contingency: every cell is masked out");
  return t;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ContingencyTable contingency(const Field& forecast, const Field& truth,
                             double threshold, const Field* mask) {
  return count_events(forecast, truth, nullptr, threshold, mask);
}

ContingencyTable contingency(const Field& forecast, const Field& truth,
                             const Field& threshold, const Field* mask) {
  return count_events(forecast, truth, &threshold, 0.0, mask);
}

std::optional<double> csi(const ContingencyTable& t) {
  const std::int64_t denom = t.tp + t.fp + t.fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(t.tp) / static_cast<double>(denom);
}

double sedi_from_rates(double hit_rate, double false_alarm_rate) {
  const double lh = std::log(hit_rate);
  const double lf = std::log(false_alarm_rate);
  const double lch = std::log1p(-hit_rate);
  const double lcf = std::log1p(-false_alarm_rate);
  return (lf - lh - lcf + lch) / (lf + lh + lcf + lch);
}

std::optional<double> sedi(const ContingencyTable& t,
                           std::optional<double> eps) {
  const std::int64_t observed = t.tp + t.fn;
  const std::int64_t unobserved = t.fp + t.tn;
  if (observed == 0 || unobserved == 0) return std::nullopt;
  const double floor =
      eps ? *eps : 1.0 / (2.0 * static_cast<double>(t.total()));
  auto clamp = [floor](double r) {
    return std::clamp(r, floor, 1.0 - floor);
  };
  const double h = clamp(static_cast<double>(t.tp) / observed);
  const double f = clamp(static_cast<double>(t.fp) / unobserved);
  return sedi_from_rates(h, f);
}

double latitude_weighted_rmse(const Field& forecast, const Field& truth) {
  const GridSpec& g = forecast.grid();
  if (!(truth.grid() == g))
    throw DataError("latitude-weighted score needs one shared grid");
  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.nlat; ++i) {
    const double w = std::cos(g.lat(i) * kPi / 180.0);
    for (int j = 0; j < g.nlon; ++j) {
      if (!forecast.valid_at(i, j) || !truth.valid_at(i, j)) continue;
      const double d = forecast.at(i, j) - truth.at(i, j);
      num += w * d * d;
      den += w;
    }
  }
  if (den == 0.0)
    throw DataError("latitude-weighted score: every cell is masked out");
  return std::sqrt(num / den);
}

std::optional<double> latitude_weighted_acc(const Field& forecast,
                                            const Field& truth,
                                            const Field& climatology_mean) {
  const GridSpec& g = forecast.grid();
  if (!(truth.grid() == g) || !(climatology_mean.grid() == g))
    throw DataError("latitude-weighted score needs one shared grid");

  double wsum = 0.0, asum = 0.0, bsum = 0.0;
  for (int i = 0; i < g.nlat; ++i) {
    const double w = std::cos(g.lat(i) * kPi / 180.0);
    for (int j = 0; j < g.nlon; ++j) {
      if (!forecast.valid_at(i, j) || !truth.valid_at(i, j) ||
          !climatology_mean.valid_at(i, j))
        continue;
      const double c = climatology_mean.at(i, j);
      wsum += w;
      asum += w * (forecast.at(i, j) - c);
      bsum += w * (truth.at(i, j) - c);
    }
  }
  if (wsum == 0.0)
    throw DataError("latitude-weighted score: every cell is masked out");
  const double amean = asum / wsum, bmean = bsum / wsum;

  double cov = 0.0, va = 0.0, vb = 0.0;
  for (int i = 0; i < g.nlat; ++i) {
    const double w = std::cos(g.lat(i) * kPi / 180.0);
    for (int j = 0; j < g.nlon; ++j) {
      if (!forecast.valid_at(i, j) || !truth.valid_at(i, j) ||
          !climatology_mean.valid_at(i, j))
        continue;
      const double c = climatology_mean.at(i, j);
      const double a = forecast.at(i, j) - c - amean;
      const double b = truth.at(i, j) - c - bmean;
      cov += w * a * b;
      va += w * a * a;
      vb += w * b * b;
    }
  }
  if (va == 0.0 || vb == 0.0) return std::nullopt;
  return cov / std::sqrt(va * vb);
}

std::string ThresholdSpec::label() const {
  char buf[32];
  if (kind == Kind::percentile)
    std::snprintf(buf, sizeof buf, "p%g", value);
  else
    std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

const std::vector<ThresholdSpec>& default_tp_thresholds() {
  static const std::vector<ThresholdSpec> t{
      ThresholdSpec::absolute(2.5), ThresholdSpec::absolute(6.25),
      ThresholdSpec::absolute(25.0), ThresholdSpec::absolute(62.5),
      ThresholdSpec::absolute(70.0)};
  return t;
}

const std::vector<ThresholdSpec>& default_ws10_thresholds() {
  static const std::vector<ThresholdSpec> t{
      ThresholdSpec::absolute(13.9), ThresholdSpec::absolute(17.2),
      ThresholdSpec::absolute(20.8), ThresholdSpec::absolute(24.5),
      ThresholdSpec::absolute(28.5), ThresholdSpec::absolute(32.7)};
  return t;
}

std::vector<ScoreRow> score_series(std::span<const FieldSet> forecasts,
                                   std::span<const FieldSet> truths,
                                   const VariableId& variable,
                                   const ThresholdSpec& spec,
                                   const ClimatologyCube* cube,
                                   const Field* mask) {
  if (spec.kind == ThresholdSpec::Kind::percentile && cube == nullptr)
    throw DataError("climatological threshold needs a climatology cube");

  std::map<std::int64_t, const FieldSet*> truth_at;
  for (const FieldSet& t : truths) truth_at[t.valid_time] = &t;

  std::string missing;
  for (const FieldSet& f : forecasts) {
    if (!truth_at.count(f.valid_time)) {
      if (!missing.empty()) missing += ", ";
      missing += format_time_utc(f.valid_time);
    }
  }
  if (!missing.empty())
    throw DataError("no truth for forecast valid times: " + missing);

  std::map<int, ContingencyTable> pooled;
  for (const FieldSet& f : forecasts) {
    const FieldSet& t = *truth_at.at(f.valid_time);
    const Field& ff = f.at(variable);
    const Field& tf = t.at(variable);
    ContingencyTable table;
    if (spec.kind == ThresholdSpec::Kind::percentile) {
      const Field thr = cube->threshold_field(
          month_of(f.valid_time), hour_of(f.valid_time), spec.value);
      table = contingency(ff, tf, thr, mask);
    } else {
      table = contingency(ff, tf, spec.value, mask);
    }
    pooled[f.lead_hours] += table;
  }

  std::vector<ScoreRow> rows;
  rows.reserve(pooled.size());
  for (const auto& [lead, table] : pooled) {
    ScoreRow row;
    row.lead_hours = lead;
    row.variable = variable.str();
    row.threshold = spec.label();
    row.table = table;
    row.csi = csi(table);
    row.sedi = sedi(table);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string scores_csv(std::span<const ScoreRow> rows) {
  std::string out = "lead_hours,variable,threshold,tp,fp,fn,tn,csi,sedi\n";
  for (const ScoreRow& r : rows) {
    out += std::to_string(r.lead_hours) + ',' + r.variable + ',' +
           r.threshold + ',' + std::to_string(r.table.tp) + ',' +
           std::to_string(r.table.fp) + ',' + std::to_string(r.table.fn) +
           ',' + std::to_string(r.table.tn) + ',';
    if (r.csi) out += g17(*r.csi);
    out += ',';
    if (r.sedi) out += g17(*r.sedi);
    out += '\n';
  }
  return out;
}

std::string scores_json(std::span<const ScoreRow> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const ScoreRow& r : rows) {
    nlohmann::ordered_json o;
    o["lead_hours"] = r.lead_hours;
    o["variable"] = r.variable;
    o["threshold"] = r.threshold;
    o["tp"] = r.table.tp;
    o["fp"] = r.table.fp;
    o["fn"] = r.table.fn;
    o["tn"] = r.table.tn;
    o["csi"] = r.csi ? nlohmann::ordered_json(*r.csi)
                     : nlohmann::ordered_json(nullptr);
    o["sedi"] = r.sedi ? nlohmann::ordered_json(*r.sedi)
                       : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

}  // namespace squall
