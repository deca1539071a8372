#pragma once

#include <stdexcept>
#include <string>

namespace netspec {

// Invalid or inconsistent user configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: divergence, non-finite values, failed solves (CLI exit code 3).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace netspec
