#pragma once

#include <stdexcept>
#include <string>

namespace cwseg {

// Base of every error raised by the library. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or mask dimensions disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// An argument is outside its legal range (e.g. upsampling factor 0).
class ParamError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (missing state, empty input...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or corrupt file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The filesystem refused a read or write.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cwseg
