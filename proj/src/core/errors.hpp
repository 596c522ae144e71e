#pragma once

#include <stdexcept>
#include <string>

namespace combraman {

// Bad configuration or input data: maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation could not be carried out: maps to CLI exit code 2.
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace combraman
