#pragma once

#include <stdexcept>
#include <string>

namespace ldboot {

// Base for every error raised by the library. The CLI maps the concrete
// types onto exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two measures (or a measure and a grid) disagree on their alphabet size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument lies outside the mathematical domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// An iterative solver failed to converge or a bracket could not be found.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A scheme / experiment configuration is malformed.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The requested case is outside what the implementation supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A documented precondition linking two inputs was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// An importance-sampling estimator cannot reach part of the target event.
class DegenerateEstimatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace ldboot
