#pragma once

#include <stdexcept>
#include <string>

namespace fpe {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or parameter block was violated.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A file or buffer does not conform to its format. The message names the
/// byte offset (binary formats) or line number (text formats).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpe
