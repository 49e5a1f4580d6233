#pragma once

#include <stdexcept>
#include <string>

namespace rtbust {

/// Base class for all rtbust failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad flags, bad parameter combinations, missing inputs. Maps to exit code 2.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Malformed or inconsistent data encountered at runtime. Exit code 1.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

/// Numerical failure (divergence, non-finite results). Exit code 1.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace rtbust
