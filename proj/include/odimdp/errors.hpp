#pragma once

#include <stdexcept>
#include <string>

namespace odimdp {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model, ambiguity set or labeling violates its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A requested structure would exceed the configured memory budget.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, double required_bytes)
      : Error(what), required_bytes_(required_bytes) {}

  double required_bytes() const noexcept { return required_bytes_; }

 private:
  double required_bytes_;
};

/// Malformed job configuration or command-line input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or has the wrong format.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A concrete state lies outside the region of interest.
class OutsideRegionError : public Error {
 public:
  using Error::Error;
};

}  // namespace odimdp
