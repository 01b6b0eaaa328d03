#include "squall/grid.hpp"

#include <cmath>

#include "squall/error.hpp"
#include "squall/timeutil.hpp"

namespace squall {

namespace {

double wrap360(double lon) {
  double w = std::fmod(lon, 360.0);
  if (w < 0) w += 360.0;
  return w;
}

const char* var_name_str(VarName n) {
  switch (n) {
    case VarName::T2M: return "T2M";
    case VarName::U10: return "U10";
    case VarName::V10: return "V10";
    case VarName::MSL: return "MSL";
    case VarName::TP: return "TP";
    case VarName::WS10: return "WS10";
    case VarName::U: return "U";
    case VarName::V: return "V";
    case VarName::Z: return "Z";
  }
  return "?";
}

bool is_upper(VarName n) {
  return n == VarName::U || n == VarName::V || n == VarName::Z;
}

bool valid_level(int hpa) {
  return hpa == 200 || hpa == 500 || hpa == 700 || hpa == 850;
}

}  // namespace

void GridSpec::validate() const {
  if (nlat < 2 || nlon < 2) throw DataError("grid must be at least 2x2");
  if (lat_step <= 0 || lon_step <= 0)
    throw DataError("grid steps must be positive");
  if (lat_start > 90.0 || lat_start < -90.0)
    throw DataError("lat_start outside [-90, 90]");
  if (lat_start - (nlat - 1) * lat_step < -90.0 - 1e-9)
    throw DataError("southernmost row below -90 degrees");
  if (earth_radius_km <= 0) throw DataError("earth radius must be positive");
}

double GridSpec::lon(int j) const { return wrap360(lon_start + j * lon_step); }

bool GridSpec::global_lon() const {
  return std::abs(nlon * lon_step - 360.0) < 1e-6;
}

VariableId VariableId::surface(VarName n) {
  VariableId v{n, std::nullopt};
  v.validate();
  return v;
}

VariableId VariableId::upper(VarName n, int level_hpa) {
  VariableId v{n, level_hpa};
  v.validate();
  return v;
}

void VariableId::validate() const {
  if (is_upper(name)) {
    if (!level) throw DataError(std::string(var_name_str(name)) +
                                " requires a pressure level");
    if (!valid_level(*level))
      throw DataError("unsupported pressure level " + std::to_string(*level));
  } else if (level) {
    throw DataError(std::string(var_name_str(name)) +
                    " is a surface variable and carries no level");
  }
}

std::string VariableId::str() const {
  std::string s = var_name_str(name);
  if (level) s += std::to_string(*level);
  return s;
}

VariableId VariableId::parse(const std::string& text) {
  static const std::map<std::string, VarName> surface{
      {"T2M", VarName::T2M}, {"U10", VarName::U10},  {"V10", VarName::V10},
      {"MSL", VarName::MSL}, {"TP", VarName::TP},    {"WS10", VarName::WS10}};
  if (auto it = surface.find(text); it != surface.end())
    return VariableId{it->second, std::nullopt};
  if (text.size() >= 2 &&
      (text[0] == 'U' || text[0] == 'V' || text[0] == 'Z')) {
    const VarName n = text[0] == 'U'   ? VarName::U
                      : text[0] == 'V' ? VarName::V
                                       : VarName::Z;
    try {
      const int level = std::stoi(text.substr(1));
      return VariableId::upper(n, level);
    } catch (const DataError&) {
      throw;
    } catch (...) {
      // fall through to the rejection below
    }
  }
  throw DataError("unknown variable name '" + text + "'");
}

const std::vector<VariableId>& surface_variables() {
  static const std::vector<VariableId> vars{
      VariableId::surface(VarName::T2M), VariableId::surface(VarName::U10),
      VariableId::surface(VarName::V10), VariableId::surface(VarName::MSL),
      VariableId::surface(VarName::TP)};
  return vars;
}

Field::Field(GridSpec grid, std::optional<VariableId> var, std::string units,
             std::vector<double> values, std::vector<std::uint8_t> valid)
    : grid_(grid),
      var_(var),
      units_(std::move(units)),
      values_(std::move(values)),
      valid_(std::move(valid)) {
  grid_.validate();
  if (var_) var_->validate();
  if (values_.size() != grid_.size())
    throw DataError("field payload size does not match grid dimensions");
  if (!valid_.empty() && valid_.size() != grid_.size())
    throw DataError("field mask size does not match grid dimensions");
  for (std::size_t n = 0; n < values_.size(); ++n) {
    const bool ok = valid_.empty() || valid_[n] != 0;
    if (ok && !std::isfinite(values_[n]))
      throw DataError("non-finite value at unmasked cell " + std::to_string(n));
  }
}

Field Field::relabeled(std::optional<VariableId> var, std::string units) const {
  return Field(grid_, var, std::move(units), values_, valid_);
}

void FieldSet::validate() const {
  if (lead_hours < 0 || lead_hours % 6 != 0)
    throw DataError("lead_hours must be a non-negative multiple of 6");
  if (!six_hour_aligned(valid_time))
    throw DataError("valid_time must be 6-hour aligned");
  const GridSpec* g = nullptr;
  for (const auto& [id, f] : fields) {
    id.validate();
    if (!g)
      g = &f.grid();
    else if (!(*g == f.grid()))
      throw DataError("fields in a set must share one grid");
  }
}

const GridSpec& FieldSet::grid() const {
  if (fields.empty()) throw DataError("empty field set has no grid");
  return fields.begin()->second.grid();
}

const Field& FieldSet::at(const VariableId& v) const {
  auto it = fields.find(v);
  if (it == fields.end())
    throw DataError("missing required field " + v.str());
  return it->second;
}

const Field* FieldSet::find(const VariableId& v) const {
  auto it = fields.find(v);
  return it == fields.end() ? nullptr : &it->second;
}

void FieldSet::insert(Field f) {
  if (!f.var()) throw DataError("cannot insert an untagged field");
  const VariableId id = *f.var();
  fields.insert_or_assign(id, std::move(f));
}

void StaticFields::validate() const {
  if (!(orography.grid() == land_sea_mask.grid()))
    throw DataError("static fields must share one grid");
  for (double v : land_sea_mask.values()) {
    if (v < 0.0 || v > 1.0)
      throw DataError("land-sea mask values must lie in [0, 1]");
  }
}

}  // namespace squall
