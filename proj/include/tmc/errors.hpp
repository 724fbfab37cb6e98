#pragma once

#include <stdexcept>
#include <string>

namespace tmc {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes:
// usage -> 1, data -> 2, numeric -> 3.
class UsageError : public std::runtime_error {
public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public DataError {
public:
  explicit IoError(const std::string& msg) : DataError(msg) {}
};

}  // namespace tmc
