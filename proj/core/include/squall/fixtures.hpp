#pragma once

#include <string>
#include <vector>

namespace squall {

struct FixtureEntry {
  std::string name;
  std::string path;  // relative to the catalog file
  std::string sha256;
  std::string description;
  std::string source;  // hand-built, generated (seed ...), ...
};

/// Digest-pinned test data inventory, loaded from a catalog.json next to
/// the fixture files.
struct FixtureCatalog {
  std::string directory;
  std::vector<FixtureEntry> entries;

  const FixtureEntry* find(const std::string& name) const;
  /// Absolute-ish path (directory-joined); throws DataError when unknown.
  std::string path_of(const std::string& name) const;
};

FixtureCatalog load_fixture_catalog(const std::string& catalog_path);

/// One line per missing or digest-stale fixture, naming it; empty when the
/// catalog is intact.
std::vector<std::string> validate_fixtures(const FixtureCatalog& catalog);

}  // namespace squall
