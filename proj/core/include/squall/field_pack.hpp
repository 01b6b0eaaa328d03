#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "squall/grid.hpp"

namespace squall {

/// In-memory image of an FPK1 container: a grid, an ordered variable list,
/// an ordered time list, and one float32 array per (time, variable),
/// time-major. Variable names are free-form strings; standard met fields
/// use VariableId::str() spellings, other producers (climatology cubes,
/// model parameters) use reserved "name:detail" spellings.
struct FieldPack {
  GridSpec grid;
  std::vector<std::string> variables;
  std::vector<std::int64_t> times;  // epoch seconds UTC
  std::vector<int> lead_hours;      // parallel to times; all zero if absent
  std::vector<std::vector<float>> payload;  // [time][variable] order, flattened

  void validate() const;

  std::size_t array_index(std::size_t t, std::size_t v) const {
    return t * variables.size() + v;
  }
  const std::vector<float>& array(std::size_t t, std::size_t v) const {
    return payload[array_index(t, v)];
  }
  std::vector<float>& array(std::size_t t, std::size_t v) {
    return payload[array_index(t, v)];
  }
};

/// Serializes to the FPK1 wire format; returns the byte count written.
/// Output is byte-for-byte deterministic for equal inputs.
std::size_t write_field_pack(const FieldPack& pack, std::ostream& sink);

/// Inverse of write_field_pack. Diagnostics name the failing byte offset.
FieldPack read_field_pack(std::istream& source);

std::string field_pack_bytes(const FieldPack& pack);
FieldPack field_pack_from_bytes(std::string_view bytes);

std::size_t write_field_pack_file(const FieldPack& pack,
                                  const std::string& path);
/// Reads a pack file; gzip-compressed files are accepted transparently.
FieldPack read_field_pack_file(const std::string& path);

/// Bridges to the met data model. Field values are narrowed to float32 on
/// write; masked cells are stored as NaN and restored as masked on read.
FieldPack pack_from_fieldsets(std::span<const FieldSet> sets);
std::vector<FieldSet> fieldsets_from_pack(const FieldPack& pack);

}  // namespace squall
