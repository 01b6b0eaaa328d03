#pragma once

#include <stdexcept>
#include <string>

namespace squall {

/// Malformed input, contract violation, or failed validation.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation left the finite/representable domain (divergence, NaN).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace squall
