#pragma once

#include <stdexcept>
#include <string>

namespace paratime {

/// Time stepping produced NaN/Inf (CFL violation or corrupt input data).
struct PropagationDiverged : std::runtime_error {
  explicit PropagationDiverged(const std::string& what) : std::runtime_error(what) {}
};

/// Bad experiment configuration or unreadable/malformed input file.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace paratime
