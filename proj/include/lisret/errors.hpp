#pragma once

#include <stdexcept>
#include <string>

namespace lisret {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operands disagree on a dimension. `axis()` names the offending axis
/// ("wavelength", "layer", "state", ...).
class DimensionError : public Error {
public:
  DimensionError(std::string axis, long expected, long actual)
      : Error("dimension mismatch on axis '" + axis + "': expected " +
              std::to_string(expected) + ", got " + std::to_string(actual)),
        axis_(std::move(axis)) {}

  const std::string& axis() const noexcept { return axis_; }

private:
  std::string axis_;
};

/// Invalid parameters or configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Factorizations that fail, non-finite values, empty selections.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Forward model produced a non-finite value at a given wavelength index.
class NonFiniteOutputError : public NumericalError {
public:
  explicit NonFiniteOutputError(long index)
      : NumericalError("non-finite forward model output at wavelength index " +
                       std::to_string(index)),
        index_(index) {}

  long index() const noexcept { return index_; }

private:
  long index_;
};

class IoError : public Error {
public:
  using Error::Error;
};

inline void require_dim(const char* axis, long expected, long actual) {
  if (expected != actual) throw DimensionError(axis, expected, actual);
}

}  // namespace lisret
