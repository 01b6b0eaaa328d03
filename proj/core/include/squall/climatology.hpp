#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "squall/field_pack.hpp"
#include "squall/grid.hpp"

namespace squall {

/// Percentile reference climatology for one variable: per calendar month,
/// synoptic hour (0/6/12/18) and gridpoint, the requested percentiles of the
/// pooled history plus its arithmetic mean. Cells never sampled are absent
/// (NaN with count 0).
class ClimatologyCube {
 public:
  ClimatologyCube() = default;
  ClimatologyCube(GridSpec grid, VariableId variable,
                  std::vector<double> percentiles);

  const GridSpec& grid() const { return grid_; }
  const VariableId& variable() const { return variable_; }
  std::span<const double> percentiles() const { return percentiles_; }

  static int slot(int month, int hour);  // (month 1..12, hour 0/6/12/18) -> 0..47

  double threshold(int month, int hour, double percentile, int i, int j) const;
  double mean(int month, int hour, int i, int j) const;
  std::int64_t sample_count(int month, int hour, int i, int j) const;

  /// Per-gridpoint threshold slice; cells with no samples come back masked.
  Field threshold_field(int month, int hour, double percentile) const;
  Field mean_field(int month, int hour) const;

  // Mutable storage access for the builder and the deserializer.
  std::vector<double>& thresholds_raw() { return thresholds_; }
  std::vector<double>& means_raw() { return means_; }
  std::vector<std::int64_t>& counts_raw() { return counts_; }
  const std::vector<double>& thresholds_raw() const { return thresholds_; }
  const std::vector<double>& means_raw() const { return means_; }
  const std::vector<std::int64_t>& counts_raw() const { return counts_; }

  std::size_t threshold_index(int slot, std::size_t p, std::size_t cell) const {
    return (static_cast<std::size_t>(slot) * percentiles_.size() + p) *
               grid_.size() +
           cell;
  }
  std::size_t slot_index(int slot, std::size_t cell) const {
    return static_cast<std::size_t>(slot) * grid_.size() + cell;
  }

 private:
  std::size_t percentile_pos(double percentile) const;  // throws if absent

  GridSpec grid_;
  VariableId variable_;
  std::vector<double> percentiles_;     // ascending
  std::vector<double> thresholds_;      // [slot][percentile][cell]
  std::vector<double> means_;           // [slot][cell]
  std::vector<std::int64_t> counts_;    // [slot][cell]
};

inline const std::vector<double>& default_climatology_percentiles() {
  static const std::vector<double> p{90.0, 95.0, 98.0, 99.5};
  return p;
}

/// Pools `history` by (calendar month, hour of day) and computes the
/// percentiles by linear interpolation between order statistics,
/// h = (n-1)*p/100 + 1 on the 1-based sorted sample, plus the mean.
/// The result does not depend on the order of `history`.
ClimatologyCube build_climatology(
    std::span<const FieldSet> history, const VariableId& variable,
    std::vector<double> percentiles = default_climatology_percentiles(),
    int workers = 1);

/// FPK1 bridge. Slots are encoded as times in the year 2000 at the slot's
/// month and hour; arrays are named "clim:<var>:p<percentile>",
/// "clim:<var>:mean" and "clim:<var>:n".
FieldPack pack_climatology(const ClimatologyCube& cube);
ClimatologyCube climatology_from_pack(const FieldPack& pack);

}  // namespace squall
