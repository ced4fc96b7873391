#pragma once

#include <stdexcept>
#include <string>

namespace levelscope {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or unvalidated configuration (payoff matrices, pools, session config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The payoff structure does not single out a unique answer where one is presumed.
class SpecAmbiguityError : public Error {
 public:
  using Error::Error;
};

// Illegal state transition in the experiment protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (CSV/JSON) with location diagnostics.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace levelscope
