#pragma once

#include <stdexcept>
#include <string>

namespace kgas {

// Raised when user-supplied data (files, configs, CLI arguments, numeric
// preconditions on inputs) is invalid. CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an internal numeric routine cannot proceed (overflow guards,
// degenerate state discovered mid-computation). CLI maps this to exit code 1.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kgas
