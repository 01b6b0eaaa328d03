#include "squall/field_pack.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "squall/error.hpp"
#include "squall/io_util.hpp"

namespace squall {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'K', '1'};

void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32le(std::string& out, float f) {
  const std::uint32_t v = std::bit_cast<std::uint32_t>(f);
  put_u32le(out, v);
}

float get_f32le(const unsigned char* p) {
  return std::bit_cast<float>(get_u32le(p));
}

nlohmann::json header_json(const FieldPack& pack) {
  nlohmann::json h;
  h["grid"] = {{"nlat", pack.grid.nlat},
               {"nlon", pack.grid.nlon},
               {"lat_start", pack.grid.lat_start},
               {"lat_step", pack.grid.lat_step},
               {"lon_start", pack.grid.lon_start},
               {"lon_step", pack.grid.lon_step},
               {"earth_radius_km", pack.grid.earth_radius_km}};
  h["variables"] = pack.variables;
  h["times"] = pack.times;
  if (!pack.lead_hours.empty()) h["lead_hours"] = pack.lead_hours;
  return h;
}

}  // namespace

void FieldPack::validate() const {
  grid.validate();
  if (!lead_hours.empty() && lead_hours.size() != times.size())
    throw DataError("lead_hours list must match the time list");
  if (payload.size() != times.size() * variables.size())
    throw DataError("payload count must equal |times| x |variables|");
  for (const auto& a : payload) {
    if (a.size() != grid.size())
      throw DataError("payload array size does not match grid");
  }
}

std::size_t write_field_pack(const FieldPack& pack, std::ostream& sink) {
  pack.validate();
  const std::string header = header_json(pack).dump();

  std::string bytes;
  bytes.reserve(8 + header.size() + 4 * pack.payload.size() * pack.grid.size());
  bytes.append(kMagic, 4);
  put_u32le(bytes, static_cast<std::uint32_t>(header.size()));
  bytes.append(header);
  for (const auto& arr : pack.payload)
    for (float f : arr) put_f32le(bytes, f);

  sink.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!sink) throw DataError("field pack: sink write failed");
  return bytes.size();
}

FieldPack read_field_pack(std::istream& source) {
  std::ostringstream buf;
  buf << source.rdbuf();
  return field_pack_from_bytes(buf.str());
}

std::string field_pack_bytes(const FieldPack& pack) {
  std::ostringstream out(std::ios::binary);
  write_field_pack(pack, out);
  return out.str();
}

FieldPack field_pack_from_bytes(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("field pack: bad magic at offset 0");
  if (bytes.size() < 8)
    throw DataError("field pack: truncated header length at offset 4");
  const std::uint32_t hlen = get_u32le(p + 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(hlen))
    throw DataError("field pack: truncated header at offset 8");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(8, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("field pack: malformed header: ") + e.what());
  }

  FieldPack pack;
  try {
    const auto& g = h.at("grid");
    pack.grid.nlat = g.at("nlat").get<int>();
    pack.grid.nlon = g.at("nlon").get<int>();
    pack.grid.lat_start = g.at("lat_start").get<double>();
    pack.grid.lat_step = g.at("lat_step").get<double>();
    pack.grid.lon_start = g.at("lon_start").get<double>();
    pack.grid.lon_step = g.at("lon_step").get<double>();
    pack.grid.earth_radius_km = g.at("earth_radius_km").get<double>();
    pack.variables = h.at("variables").get<std::vector<std::string>>();
    pack.times = h.at("times").get<std::vector<std::int64_t>>();
    if (h.contains("lead_hours"))
      pack.lead_hours = h.at("lead_hours").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("field pack: header missing field: ") +
                    e.what());
  }
  pack.grid.validate();
  if (!pack.lead_hours.empty() &&
      pack.lead_hours.size() != pack.times.size())
    throw DataError("field pack: lead_hours list must match the time list");

  const std::size_t cell_count = pack.grid.size();
  const std::size_t n_arrays = pack.times.size() * pack.variables.size();
  const std::size_t payload_off = 8 + hlen;
  const std::size_t need = n_arrays * cell_count * 4;
  if (bytes.size() - payload_off < need) {
    throw DataError("field pack: truncated payload at offset " +
                    std::to_string(bytes.size()));
  }
  if (bytes.size() - payload_off > need) {
    throw DataError("field pack: trailing bytes after payload at offset " +
                    std::to_string(payload_off + need));
  }

  pack.payload.resize(n_arrays);
  const unsigned char* cur = p + payload_off;
  for (std::size_t a = 0; a < n_arrays; ++a) {
    auto& arr = pack.payload[a];
    arr.resize(cell_count);
    for (std::size_t n = 0; n < cell_count; ++n, cur += 4)
      arr[n] = get_f32le(cur);
  }
  return pack;
}

std::size_t write_field_pack_file(const FieldPack& pack,
                                  const std::string& path) {
  const std::string bytes = field_pack_bytes(pack);
  write_file(path, bytes);
  return bytes.size();
}

FieldPack read_field_pack_file(const std::string& path) {
  return field_pack_from_bytes(read_file(path));
}

FieldPack pack_from_fieldsets(std::span<const FieldSet> sets) {
  if (sets.empty()) throw DataError("cannot pack an empty field set list");
  FieldPack pack;
  pack.grid = sets.front().grid();
  for (const auto& [id, f] : sets.front().fields)
    pack.variables.push_back(id.str());
  for (const FieldSet& fs : sets) {
    fs.validate();
    if (!(fs.grid() == pack.grid))
      throw DataError("field sets must share one grid to be packed");
    if (fs.fields.size() != pack.variables.size())
      throw DataError("field sets must share one variable list to be packed");
    pack.times.push_back(fs.valid_time);
    pack.lead_hours.push_back(fs.lead_hours);
    std::size_t v = 0;
    for (const auto& [id, f] : fs.fields) {
      if (id.str() != pack.variables[v])
        throw DataError("field sets must share one variable list to be packed");
      std::vector<float> arr(f.values().size());
      for (std::size_t n = 0; n < arr.size(); ++n) {
        arr[n] = f.valid_at(static_cast<int>(n / pack.grid.nlon),
                            static_cast<int>(n % pack.grid.nlon))
                     ? static_cast<float>(f.values()[n])
                     : std::numeric_limits<float>::quiet_NaN();
      }
      pack.payload.push_back(std::move(arr));
      ++v;
    }
  }
  pack.validate();
  return pack;
}

std::vector<FieldSet> fieldsets_from_pack(const FieldPack& pack) {
  pack.validate();
  std::vector<VariableId> ids;
  ids.reserve(pack.variables.size());
  for (const auto& name : pack.variables) ids.push_back(VariableId::parse(name));

  std::vector<FieldSet> sets;
  sets.reserve(pack.times.size());
  for (std::size_t t = 0; t < pack.times.size(); ++t) {
    FieldSet fs;
    fs.valid_time = pack.times[t];
    fs.lead_hours = pack.lead_hours.empty() ? 0 : pack.lead_hours[t];
    for (std::size_t v = 0; v < ids.size(); ++v) {
      const auto& arr = pack.array(t, v);
      std::vector<double> values(arr.size());
      std::vector<std::uint8_t> valid;
      bool any_nan = false;
      for (std::size_t n = 0; n < arr.size(); ++n) {
        values[n] = arr[n];
        if (std::isnan(arr[n])) any_nan = true;
      }
      if (any_nan) {
        valid.resize(arr.size());
        for (std::size_t n = 0; n < arr.size(); ++n)
          valid[n] = std::isnan(arr[n]) ? 0 : 1;
      }
      fs.fields.emplace(ids[v], Field(pack.grid, ids[v], "", std::move(values),
                                      std::move(valid)));
    }
    fs.validate();
    sets.push_back(std::move(fs));
  }
  return sets;
}

}  // namespace squall
