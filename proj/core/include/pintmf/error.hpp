#pragma once

#include <stdexcept>
#include <string>

namespace pintmf {

/// Bad arguments, malformed files, violated preconditions. Maps to CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation could not produce a usable result. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by lambda_path when the largest useful penalty is zero (e.g. all-zero response).
class DegeneratePathError : public NumericalError {
 public:
  DegeneratePathError() : NumericalError("degenerate path") {}
};

/// Raised when a correlation has a zero-variance argument.
class DegenerateCorrelationError : public NumericalError {
 public:
  DegenerateCorrelationError() : NumericalError("degenerate correlation") {}
};

}  // namespace pintmf
