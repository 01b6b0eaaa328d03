#include "squall/fixtures.hpp"

#include <filesystem>

#include <json.hpp>

#include "squall/error.hpp"
#include "squall/io_util.hpp"

namespace squall {

const FixtureEntry* FixtureCatalog::find(const std::string& name) const {
  for (const FixtureEntry& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::string FixtureCatalog::path_of(const std::string& name) const {
  const FixtureEntry* e = find(name);
  if (!e) throw DataError("unknown fixture: " + name);
  return (std::filesystem::path(directory) / e->path).string();
}

FixtureCatalog load_fixture_catalog(const std::string& catalog_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(catalog_path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("fixture catalog is not valid JSON: ") +
                    e.what());
  }

  FixtureCatalog catalog;
  catalog.directory =
      std::filesystem::path(catalog_path).parent_path().string();
  if (catalog.directory.empty()) catalog.directory = ".";
  try {
    for (const nlohmann::json& entry : doc.at("fixtures")) {
      FixtureEntry e;
      e.name = entry.at("name").get<std::string>();
      e.path = entry.at("path").get<std::string>();
      e.sha256 = entry.at("sha256").get<std::string>();
      e.description = entry.value("description", "");
      e.source = entry.value("source", "");
      catalog.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("fixture catalog missing field: ") + e.what());
  }
  return catalog;
}

std::vector<std::string> validate_fixtures(const FixtureCatalog& catalog) {
  std::vector<std::string> problems;
  for (const FixtureEntry& e : catalog.entries) {
    const std::string path =
        (std::filesystem::path(catalog.directory) / e.path).string();
    std::string digest;
    try {
      digest = sha256_file(path);
    } catch (const DataError&) {
      problems.push_back("missing fixture: " + e.name + " (" + path + ")");
      continue;
    }
    if (digest != e.sha256)
      problems.push_back("stale digest for fixture: " + e.name + " (" + path +
                         ")");
  }
  return problems;
}

}  // namespace squall
