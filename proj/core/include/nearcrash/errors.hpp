#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nearcrash {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or domain invariant was violated by a caller-supplied value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A text record could not be interpreted. Carries the 1-based row number
/// of the offending line when known (0 = unknown).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t row = 0)
      : Error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// A file could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A query had no answer (e.g. every candidate was excluded).
class LookupError : public Error {
 public:
  using Error::Error;
};

/// The run configuration is unusable before any data is touched.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nearcrash
