#pragma once

#include <stdexcept>
#include <string>

namespace ncfr {

/// Contract or dimension violation: the inputs cannot describe a valid model.
struct StructuralError : std::invalid_argument {
  explicit StructuralError(const std::string& what) : std::invalid_argument(what) {}
};

/// Non-finite intermediate, failed factorization, or similar numeric failure.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Unreadable, unwritable, or malformed file.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid or inconsistent run configuration; message names the offending key.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ncfr
