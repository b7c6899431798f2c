#pragma once

#include <stdexcept>
#include <string>

namespace tpg {

// Configuration problems: bad values, unknown keys, version mismatch.
// The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and serialization failures. CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tpg
