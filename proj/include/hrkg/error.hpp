#pragma once

#include <stdexcept>
#include <string>

namespace hrkg {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; message carries the source name and line when known.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates an invariant (duplicate id, bad range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Transport or HTTP failure after retries were exhausted.
class NetworkError : public Error {
 public:
  using Error::Error;
};

/// Missing or inconsistent configuration detected before doing work.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or parameter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hrkg
