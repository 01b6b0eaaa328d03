#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "squall/error.hpp"
#include "squall/field_pack.hpp"
#include "squall/io_util.hpp"
#include "test_support.hpp"

using namespace squall;
using namespace squall::test;

namespace {

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("field pack bytes round trip exactly, NaN included") {
  const FieldPack pack = tiny_pack_fixture();
  const std::string bytes = field_pack_bytes(pack);
  CHECK(bytes.substr(0, 4) == "FPK1");
  CHECK(field_pack_bytes(pack) == bytes);  // byte-deterministic

  const FieldPack back = field_pack_from_bytes(bytes);
  CHECK(back.grid == pack.grid);
  CHECK(back.variables == pack.variables);
  CHECK(back.times == pack.times);
  CHECK(back.lead_hours == pack.lead_hours);
  REQUIRE(back.payload.size() == pack.payload.size());
  CHECK(std::isnan(back.payload[1][7]));
  CHECK(field_pack_bytes(back) == bytes);
}

TEST_CASE("field pack validation catches shape mismatches") {
  FieldPack pack = tiny_pack_fixture();
  pack.lead_hours.pop_back();
  CHECK_THROWS_WITH_AS(pack.validate(),
                       "lead_hours list must match the time list", DataError);
  pack.lead_hours.push_back(6);

  pack.payload.pop_back();
  CHECK_THROWS_WITH_AS(pack.validate(),
                       "payload count must equal |times| x |variables|",
                       DataError);
  pack.payload.push_back(std::vector<float>(3, 0.0f));
  CHECK_THROWS_WITH_AS(pack.validate(),
                       "payload array size does not match grid", DataError);
}

TEST_CASE("corrupt streams are diagnosed with byte offsets") {
  const std::string bytes = field_pack_bytes(tiny_pack_fixture());

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH_AS(field_pack_from_bytes(bad_magic),
                       "field pack: bad magic at offset 0", DataError);

  CHECK_THROWS_WITH_AS(field_pack_from_bytes(bytes.substr(0, 6)),
                       "field pack: truncated header length at offset 4",
                       DataError);
  CHECK_THROWS_WITH_AS(field_pack_from_bytes(bytes.substr(0, 20)),
                       "field pack: truncated header at offset 8", DataError);

  const std::string short_payload = bytes.substr(0, bytes.size() - 5);
  CHECK_THROWS_WITH_AS(field_pack_from_bytes(short_payload),
                       ("field pack: truncated payload at offset " +
                        std::to_string(short_payload.size()))
                           .c_str(),
                       DataError);

  const std::string long_payload = bytes + "!!";
  CHECK_THROWS_WITH_AS(field_pack_from_bytes(long_payload),
                       ("field pack: trailing bytes after payload at offset " +
                        std::to_string(bytes.size()))
                           .c_str(),
                       DataError);
}

TEST_CASE("malformed and incomplete headers are rejected") {
  std::string garbled = "FPK1";
  const std::string body = "{not json";
  garbled.push_back(static_cast<char>(body.size()));
  garbled.append(3, '\0');
  garbled += body;
  CHECK_THROWS_AS(field_pack_from_bytes(garbled), DataError);

  std::string incomplete = "FPK1";
  const std::string missing = R"({"variables":[],"times":[]})";
  incomplete.push_back(static_cast<char>(missing.size()));
  incomplete.append(3, '\0');
  incomplete += missing;
  CHECK_THROWS_AS(field_pack_from_bytes(incomplete), DataError);
  try {
    field_pack_from_bytes(incomplete);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).starts_with(
        "field pack: header missing field:"));
  }
}

TEST_CASE("pack files read back and decompress transparently") {
  const FieldPack pack = tiny_pack_fixture();
  const std::string plain = temp_file("squall_pack_plain.fpk");
  const std::string gz = temp_file("squall_pack_gz.fpk");

  write_field_pack_file(pack, plain);
  const std::string bytes = read_file(plain);
  CHECK(bytes == field_pack_bytes(pack));

  write_file(gz, gzip(bytes));
  CHECK(read_file(gz) == bytes);  // transparent inflate on read
  const FieldPack from_gz = read_field_pack_file(gz);
  CHECK(field_pack_bytes(from_gz) == bytes);

  std::remove(plain.c_str());
  std::remove(gz.c_str());

  CHECK_THROWS_AS(read_field_pack_file(plain), DataError);
}

TEST_CASE("gzip round trips and is sniffed by magic") {
  const std::string text(100000, 'q');
  const std::string zipped = gzip(text);
  CHECK(looks_gzip(zipped));
  CHECK(zipped.size() < text.size());
  CHECK(gunzip(zipped) == text);
  CHECK_FALSE(looks_gzip(text));
  CHECK_THROWS_AS(gunzip(text), DataError);
  CHECK_THROWS_WITH_AS(gunzip(zipped.substr(0, zipped.size() / 2)),
                       "gzip: truncated stream", DataError);
}

TEST_CASE("sha256 matches the reference vector") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");

  const std::string path = temp_file("squall_sha_probe.bin");
  write_file(path, "abc");
  CHECK(sha256_file(path) == sha256_hex("abc"));
  std::remove(path.c_str());
}

TEST_CASE("field set bridge narrows to float32 and restores masks") {
  const GridSpec g = small_grid(2, 3);
  FieldSet a;
  a.valid_time = 0;
  a.lead_hours = 0;
  a.insert(make_field(g, {300.125, 299.5, 0.1, 1e-7, 288.0, 301.25},
                      VariableId::surface(VarName::T2M), "K"));
  a.insert(make_field(g, {1013.0, 1010.0, 995.5, 990.25, 1000.0, 1005.75},
                      VariableId::surface(VarName::MSL), "hPa",
                      {1, 1, 1, 0, 1, 1}));
  FieldSet b = a;
  b.valid_time = 6 * 3600;
  b.lead_hours = 6;

  const FieldPack pack = pack_from_fieldsets(std::vector<FieldSet>{a, b});
  CHECK(pack.variables == std::vector<std::string>{"T2M", "MSL"});
  CHECK(pack.times == std::vector<std::int64_t>{0, 6 * 3600});
  CHECK(pack.lead_hours == std::vector<int>{0, 6});
  CHECK(std::isnan(pack.array(0, 1)[3]));
  CHECK(pack.array(0, 0)[0] == 300.125f);
  CHECK(pack.array(0, 0)[3] == static_cast<float>(1e-7));

  const auto sets = fieldsets_from_pack(pack);
  REQUIRE(sets.size() == 2);
  const Field& msl = sets[0].at(VariableId::surface(VarName::MSL));
  CHECK(msl.has_mask());
  CHECK_FALSE(msl.valid_at(1, 0));
  CHECK(msl.at(0, 0) == 1013.0);
  const Field& t2m = sets[0].at(VariableId::surface(VarName::T2M));
  CHECK_FALSE(t2m.has_mask());
  CHECK(t2m.at(0, 0) == 300.125);

  // A second pass through the pack form is byte-stable: float32 narrowing
  // is idempotent.
  CHECK(field_pack_bytes(pack_from_fieldsets(sets)) ==
        field_pack_bytes(pack));

  CHECK_THROWS_WITH_AS(pack_from_fieldsets(std::vector<FieldSet>{}),
                       "cannot pack an empty field set list", DataError);
  FieldSet other = a;
  other.valid_time = 12 * 3600;
  other.fields.erase(VariableId::surface(VarName::MSL));
  CHECK_THROWS_WITH_AS(pack_from_fieldsets(std::vector<FieldSet>{a, other}),
                       "field sets must share one variable list to be packed",
                       DataError);
}

TEST_CASE("random packs round trip byte for byte") {
  Rng rng(9001);
  for (int trial = 0; trial < 20; ++trial) {
    FieldPack pack;
    pack.grid = small_grid(2 + static_cast<int>(rng.bounded(4)),
                           2 + static_cast<int>(rng.bounded(5)));
    const int nvars = 1 + static_cast<int>(rng.bounded(3));
    for (int v = 0; v < nvars; ++v)
      pack.variables.push_back("var" + std::to_string(v));
    const int ntimes = 1 + static_cast<int>(rng.bounded(3));
    for (int t = 0; t < ntimes; ++t) pack.times.push_back(t * 21600);
    pack.payload.resize(pack.times.size() * pack.variables.size());
    for (auto& arr : pack.payload) {
      arr.resize(pack.grid.size());
      for (float& x : arr) {
        x = static_cast<float>(rng.normal());
        if (rng.bounded(16) == 0) x = std::numeric_limits<float>::quiet_NaN();
      }
    }
    const std::string bytes = field_pack_bytes(pack);
    CHECK(field_pack_bytes(field_pack_from_bytes(bytes)) == bytes);
  }
}
