#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace squall {

/// Regular lat-lon grid. Row 0 is the northernmost latitude; longitude
/// runs eastward from lon_start and wraps modulo 360.
struct GridSpec {
  int nlat = 0;
  int nlon = 0;
  double lat_start = 90.0;  // northernmost row centre, degrees
  double lat_step = 0.25;   // positive, applied southward
  double lon_start = 0.0;   // degrees east
  double lon_step = 0.25;   // positive, eastward
  double earth_radius_km = 6371.0;

  void validate() const;  // throws DataError

  double lat(int i) const { return lat_start - i * lat_step; }
  double lon(int j) const;  // wrapped to [0, 360)
  std::size_t size() const {
    return static_cast<std::size_t>(nlat) * static_cast<std::size_t>(nlon);
  }
  /// True when the rows cover the full circle of longitudes.
  bool global_lon() const;

  bool operator==(const GridSpec&) const = default;
};

enum class VarName { T2M, U10, V10, MSL, TP, WS10, U, V, Z };

/// Registry identity of a met variable. Surface variables carry no level;
/// U/V/Z carry exactly one of the four steering/thickness levels.
struct VariableId {
  VarName name = VarName::T2M;
  std::optional<int> level;  // hPa

  static VariableId surface(VarName n);
  static VariableId upper(VarName n, int level_hpa);
  void validate() const;

  std::string str() const;  // "T2M", "U850", "Z200", ...
  static VariableId parse(const std::string& text);

  auto operator<=>(const VariableId&) const = default;
};

/// T2M, U10, V10, MSL, TP in registry order.
const std::vector<VariableId>& surface_variables();

/// One 2-D scalar on a grid, row-major, row 0 northernmost. Values are
/// finite unless the cell is masked; masked cells hold NaN.
class Field {
 public:
  Field() = default;
  Field(GridSpec grid, std::optional<VariableId> var, std::string units,
        std::vector<double> values, std::vector<std::uint8_t> valid = {});

  const GridSpec& grid() const { return grid_; }
  const std::optional<VariableId>& var() const { return var_; }
  const std::string& units() const { return units_; }
  std::span<const double> values() const { return values_; }

  double at(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * grid_.nlon + j];
  }
  bool has_mask() const { return !valid_.empty(); }
  bool valid_at(int i, int j) const {
    return valid_.empty() ||
           valid_[static_cast<std::size_t>(i) * grid_.nlon + j] != 0;
  }
  std::span<const std::uint8_t> validity() const { return valid_; }

  /// Copy with a different variable tag / units, same data.
  Field relabeled(std::optional<VariableId> var, std::string units) const;

 private:
  GridSpec grid_;
  std::optional<VariableId> var_;
  std::string units_;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;  // empty means all valid
};

/// A keyed collection of fields for one valid time.
struct FieldSet {
  std::int64_t valid_time = 0;  // epoch seconds UTC, 6-hour aligned
  int lead_hours = 0;           // multiple of 6, >= 0
  std::map<VariableId, Field> fields;

  void validate() const;
  const GridSpec& grid() const;
  const Field& at(const VariableId& v) const;  // throws if absent
  const Field* find(const VariableId& v) const;
  void insert(Field f);  // keys by the field's VariableId
};

struct StaticFields {
  Field orography;      // metres
  Field land_sea_mask;  // fraction in [0, 1]

  void validate() const;
};

}  // namespace squall
