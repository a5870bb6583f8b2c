#pragma once

#include <stdexcept>
#include <string>

namespace apart {

// Invalid or inconsistent experiment settings.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace apart
