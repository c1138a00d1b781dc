#pragma once

#include <stdexcept>
#include <string>

namespace deltom {

// Base of everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or parameters. CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or inconsistent input data. CLI exit code 3.
struct DataError : Error {
  using Error::Error;
};

// A checked internal invariant failed; indicates a bug, not bad input.
// CLI exit code 4.
struct InvariantError : Error {
  using Error::Error;
};

struct UnknownAgent : DataError {
  using DataError::DataError;
};

struct DuplicateAgent : DataError {
  using DataError::DataError;
};

struct PreconditionFailed : DataError {
  using DataError::DataError;
};

struct UnsupportedAction : DataError {
  using DataError::DataError;
};

// Zero or several locations satisfy a chain formula after a kernel fold.
struct AmbiguousBelief : InvariantError {
  using InvariantError::InvariantError;
};

struct MalformedTrace : DataError {
  using DataError::DataError;
};

struct UnknownTemplate : ConfigError {
  using ConfigError::ConfigError;
};

struct OrphanTrace : DataError {
  using DataError::DataError;
};

struct RemoteUnavailable : DataError {
  using DataError::DataError;
};

struct EmptyTrace : DataError {
  using DataError::DataError;
};

struct GeneratorFailure : DataError {
  using DataError::DataError;
};

struct DepthExhausted : DataError {
  using DataError::DataError;
};

struct DomainError : ConfigError {
  using ConfigError::ConfigError;
};

struct DominanceViolation : InvariantError {
  using InvariantError::InvariantError;
};

}  // namespace deltom
