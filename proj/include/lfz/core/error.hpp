#pragma once

#include <stdexcept>
#include <string>

namespace lfz {

/// Malformed or inconsistent input data (files, streams, dimensions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments supplied by a caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lfz
