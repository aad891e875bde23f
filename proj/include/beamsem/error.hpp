#pragma once

#include <stdexcept>
#include <string>

namespace beamsem {

/// Raised when an operation that needs at least one propagation path gets
/// none. Kept distinct from a zero channel so callers can flag outages.
class NoPathsError : public std::invalid_argument {
 public:
  NoPathsError() : std::invalid_argument("no paths") {}
  explicit NoPathsError(const std::string& what) : std::invalid_argument("no paths: " + what) {}
};

/// Malformed or inconsistent data on disk (dataset records, model files,
/// config files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace beamsem
