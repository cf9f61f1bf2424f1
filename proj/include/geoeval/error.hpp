#pragma once

#include <stdexcept>
#include <string>

namespace geoeval {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (sizes, ranges, conventions).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is unusable: degenerate geometry, empty sets, missing frames.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A file or JSON document could not be decoded.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace detail
}  // namespace geoeval
