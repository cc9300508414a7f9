#pragma once

#include <stdexcept>
#include <string>

namespace temporalot {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input (trajectory, matrix, trace or config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A value violates a domain-type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A caller-supplied parameter is out of range.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// The mask admits no transport plan with the requested marginals.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

// Overflow, underflow or non-finite values during the Sinkhorn iterations.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace temporalot
