#pragma once

#include <string>
#include <string_view>

namespace squall {

/// Reads a whole file; transparently inflates gzip members (sniffed by the
/// 1f 8b magic, independent of the file name).
std::string read_file(const std::string& path);

void write_file(const std::string& path, std::string_view bytes);

bool looks_gzip(std::string_view bytes);
std::string gzip(std::string_view bytes);
std::string gunzip(std::string_view bytes);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace squall
