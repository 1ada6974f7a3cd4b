#ifndef FACEWARP_ERROR_HPP
#define FACEWARP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace facewarp {

// Base of every error thrown by the library. The CLI maps each subclass to
// its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed command-line or configuration arguments.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Missing file, unreadable/unwritable path, malformed PNG or JSON.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input that is well-formed but violates a schema or a parameter bound.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Landmark geometry that makes a formula undefined (coincident eye centers,
// zero eye radius).
class DegenerateGeometryError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Control-point layout for which the selected MLS closed form has no
// solution.
class DegenerateConfigurationError : public Error {
 public:
  DegenerateConfigurationError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}

  // Condition estimate of the offending moment matrix (infinity when
  // exactly singular).
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace facewarp

#endif  // FACEWARP_ERROR_HPP
