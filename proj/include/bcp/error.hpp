#pragma once

#include <stdexcept>
#include <string>

namespace bcp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, preset name or expression.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A problem or direction that violates a fatal regularity condition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a solver (non-finite sweep, bad grid, ...).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an analytic formula or interpolant.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace bcp
