#include "squall/climatology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <thread>

#include "squall/error.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

constexpr int kSlots = 48;  // 12 months x 4 synoptic hours
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string percentile_label(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%g", p);
  return buf;
}

/// Linear interpolation between order statistics of an ascending sample,
/// h = (n-1)*p/100 + 1 on 1-based indices.
double interpolated_percentile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = (static_cast<double>(n) - 1.0) * p / 100.0 + 1.0;
  const double fl = std::floor(h);
  const auto k = static_cast<std::size_t>(fl);  // 1-based
  if (k >= n) return sorted.back();
  if (k < 1) return sorted.front();
  return sorted[k - 1] + (h - fl) * (sorted[k] - sorted[k - 1]);
}

}  // namespace

ClimatologyCube::ClimatologyCube(GridSpec grid, VariableId variable,
                                 std::vector<double> percentiles)
    : grid_(grid), variable_(variable), percentiles_(std::move(percentiles)) {
  grid_.validate();
  variable_.validate();
  if (percentiles_.empty())
    throw DataError("climatology needs at least one percentile");
  if (!std::is_sorted(percentiles_.begin(), percentiles_.end()))
    throw DataError("climatology percentiles must be ascending");
  for (double p : percentiles_)
    if (!(p > 0.0 && p < 100.0))
      throw DataError("climatology percentile out of (0, 100)");
  thresholds_.assign(kSlots * percentiles_.size() * grid_.size(), kNaN);
  means_.assign(kSlots * grid_.size(), kNaN);
  counts_.assign(kSlots * grid_.size(), 0);
}

int ClimatologyCube::slot(int month, int hour) {
  if (month < 1 || month > 12)
    throw DataError("climatology month must be in 1..12");
  if (hour < 0 || hour > 18 || hour % 6 != 0)
    throw DataError("climatology hour must be one of 0, 6, 12, 18");
  return (month - 1) * 4 + hour / 6;
}

std::size_t ClimatologyCube::percentile_pos(double percentile) const {
  for (std::size_t p = 0; p < percentiles_.size(); ++p)
    if (percentiles_[p] == percentile) return p;
  std::string available;
  for (double p : percentiles_) {
    if (!available.empty()) available += ", ";
    available += percentile_label(p);
  }
  throw DataError("climatology has no " + percentile_label(percentile) +
                  "; available: " + available);
}

double ClimatologyCube::threshold(int month, int hour, double percentile,
                                  int i, int j) const {
  const int s = slot(month, hour);
  const std::size_t p = percentile_pos(percentile);
  return thresholds_[threshold_index(
      s, p, static_cast<std::size_t>(i) * grid_.nlon + j)];
}

double ClimatologyCube::mean(int month, int hour, int i, int j) const {
  return means_[slot_index(slot(month, hour),
                           static_cast<std::size_t>(i) * grid_.nlon + j)];
}

std::int64_t ClimatologyCube::sample_count(int month, int hour, int i,
                                           int j) const {
  return counts_[slot_index(slot(month, hour),
                            static_cast<std::size_t>(i) * grid_.nlon + j)];
}

Field ClimatologyCube::threshold_field(int month, int hour,
                                       double percentile) const {
  const int s = slot(month, hour);
  const std::size_t p = percentile_pos(percentile);
  const std::size_t cells = grid_.size();
  std::vector<double> values(cells);
  std::vector<std::uint8_t> valid(cells, 1);
  bool any_masked = false;
  for (std::size_t c = 0; c < cells; ++c) {
    values[c] = thresholds_[threshold_index(s, p, c)];
    if (counts_[slot_index(s, c)] == 0) {
      valid[c] = 0;
      any_masked = true;
    }
  }
  if (!any_masked) valid.clear();
  return Field(grid_, std::nullopt, "", std::move(values), std::move(valid));
}

Field ClimatologyCube::mean_field(int month, int hour) const {
  const int s = slot(month, hour);
  const std::size_t cells = grid_.size();
  std::vector<double> values(cells);
  std::vector<std::uint8_t> valid(cells, 1);
  bool any_masked = false;
  for (std::size_t c = 0; c < cells; ++c) {
    values[c] = means_[slot_index(s, c)];
    if (counts_[slot_index(s, c)] == 0) {
      valid[c] = 0;
      any_masked = true;
    }
  }
  if (!any_masked) valid.clear();
  return Field(grid_, std::nullopt, "", std::move(values), std::move(valid));
}

ClimatologyCube build_climatology(std::span<const FieldSet> history,
                                  const VariableId& variable,
                                  std::vector<double> percentiles,
                                  int workers) {
  if (history.empty())
    throw DataError("climatology needs a non-empty history");
  const GridSpec grid = history.front().grid();
  for (const FieldSet& fs : history) {
    fs.validate();
    if (!(fs.grid() == grid))
      throw DataError("climatology history mixes grids");
    fs.at(variable);
  }

  ClimatologyCube cube(grid, variable, std::move(percentiles));
  const std::size_t cells = grid.size();
  const std::size_t n_pct = cube.percentiles().size();

  // Index the history by slot once; per-cell work then touches only the
  // relevant field sets.
  std::vector<std::vector<const Field*>> by_slot(kSlots);
  for (const FieldSet& fs : history) {
    const int s = ClimatologyCube::slot(month_of(fs.valid_time),
                                        hour_of(fs.valid_time));
    by_slot[s].push_back(&fs.at(variable));
  }

  auto process_cells = [&](std::size_t begin, std::size_t end) {
    std::vector<double> samples;
    for (std::size_t c = begin; c < end; ++c) {
      const int i = static_cast<int>(c / grid.nlon);
      const int j = static_cast<int>(c % grid.nlon);
      for (int s = 0; s < kSlots; ++s) {
        samples.clear();
        for (const Field* f : by_slot[s])
          if (f->valid_at(i, j)) samples.push_back(f->at(i, j));
        cube.counts_raw()[cube.slot_index(s, c)] =
            static_cast<std::int64_t>(samples.size());
        if (samples.empty()) continue;
        // Sorting before both reductions makes the result, including its
        // floating-point rounding, independent of history order.
        std::sort(samples.begin(), samples.end());
        double sum = 0.0;
        for (double v : samples) sum += v;
        cube.means_raw()[cube.slot_index(s, c)] =
            sum / static_cast<double>(samples.size());
        for (std::size_t p = 0; p < n_pct; ++p) {
          cube.thresholds_raw()[cube.threshold_index(s, p, c)] =
              interpolated_percentile(samples, cube.percentiles()[p]);
        }
      }
    }
  };

  if (workers <= 1 || cells < 2) {
    process_cells(0, cells);
  } else {
    const auto n = std::min<std::size_t>(workers, cells);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t w = 0; w < n; ++w) {
      const std::size_t begin = cells * w / n;
      const std::size_t end = cells * (w + 1) / n;
      pool.emplace_back(process_cells, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return cube;
}

FieldPack pack_climatology(const ClimatologyCube& cube) {
  FieldPack pack;
  pack.grid = cube.grid();
  const std::string stem = "clim:" + cube.variable().str() + ":";
  for (double p : cube.percentiles())
    pack.variables.push_back(stem + percentile_label(p));
  pack.variables.push_back(stem + "mean");
  pack.variables.push_back(stem + "n");

  const std::size_t cells = cube.grid().size();
  for (int s = 0; s < kSlots; ++s) {
    CivilTime c;
    c.year = 2000;
    c.month = s / 4 + 1;
    c.day = 1;
    c.hour = (s % 4) * 6;
    pack.times.push_back(to_epoch_seconds(c));
    pack.lead_hours.push_back(0);
    for (std::size_t p = 0; p < cube.percentiles().size(); ++p) {
      std::vector<float> arr(cells);
      for (std::size_t cell = 0; cell < cells; ++cell)
        arr[cell] =
            static_cast<float>(cube.thresholds_raw()[cube.threshold_index(
                s, p, cell)]);
      pack.payload.push_back(std::move(arr));
    }
    std::vector<float> mean_arr(cells), n_arr(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      mean_arr[cell] =
          static_cast<float>(cube.means_raw()[cube.slot_index(s, cell)]);
      n_arr[cell] =
          static_cast<float>(cube.counts_raw()[cube.slot_index(s, cell)]);
    }
    pack.payload.push_back(std::move(mean_arr));
    pack.payload.push_back(std::move(n_arr));
  }
  pack.validate();
  return pack;
}

ClimatologyCube climatology_from_pack(const FieldPack& pack) {
  pack.validate();
  if (pack.times.size() != kSlots)
    throw DataError("climatology pack must hold exactly 48 month/hour slots");
  if (pack.variables.size() < 3)
    throw DataError("climatology pack must hold percentiles, mean and counts");

  // All names share one "clim:<var>:" stem; the last two are mean and n.
  const std::string& first = pack.variables.front();
  const auto tail = first.rfind(':');
  if (first.rfind("clim:", 0) != 0 || tail == std::string::npos || tail < 5)
    throw DataError("not a climatology pack: unexpected name '" + first + "'");
  const std::string stem = first.substr(0, tail + 1);
  const VariableId variable = VariableId::parse(first.substr(5, tail - 5));

  std::vector<double> percentiles;
  for (std::size_t v = 0; v + 2 < pack.variables.size(); ++v) {
    const std::string& name = pack.variables[v];
    if (name.rfind(stem + "p", 0) != 0)
      throw DataError("not a climatology pack: unexpected name '" + name + "'");
    percentiles.push_back(std::stod(name.substr(stem.size() + 1)));
  }
  if (pack.variables[pack.variables.size() - 2] != stem + "mean" ||
      pack.variables.back() != stem + "n")
    throw DataError("climatology pack must end with mean and count arrays");

  ClimatologyCube cube(pack.grid, variable, std::move(percentiles));
  const std::size_t n_pct = cube.percentiles().size();
  const std::size_t cells = pack.grid.size();
  for (std::size_t t = 0; t < kSlots; ++t) {
    const int s = ClimatologyCube::slot(month_of(pack.times[t]),
                                        hour_of(pack.times[t]));
    for (std::size_t p = 0; p < n_pct; ++p) {
      const auto& arr = pack.array(t, p);
      for (std::size_t cell = 0; cell < cells; ++cell)
        cube.thresholds_raw()[cube.threshold_index(s, p, cell)] = arr[cell];
    }
    const auto& mean_arr = pack.array(t, n_pct);
    const auto& n_arr = pack.array(t, n_pct + 1);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      cube.means_raw()[cube.slot_index(s, cell)] = mean_arr[cell];
      cube.counts_raw()[cube.slot_index(s, cell)] =
          static_cast<std::int64_t>(std::llround(n_arr[cell]));
    }
  }
  return cube;
}

}  // namespace squall
