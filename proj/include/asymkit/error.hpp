#pragma once

#include <stdexcept>
#include <string>

namespace asymkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, malformed records, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Missing files, short reads, failed writes.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace asymkit
