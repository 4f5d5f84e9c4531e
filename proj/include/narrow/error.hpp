#pragma once

#include <stdexcept>
#include <string>

namespace narrow {

// Base of every error thrown by the library. The CLI maps the subclasses to
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller handed us something malformed: wrong dimensions, bad flags, etc.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Serialized artifact does not match the expected schema or version.
class SchemaError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// Network shape outside what an analysis supports (e.g. hidden width != d_in).
class OutOfScopeNet : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : InvalidInput(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Point configuration with ties or vanishing gaps (interpolation).
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

// A geometric invariant of the ball-growing construction failed.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class ModulusError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during evaluation of a target, expression or network.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant; indicates a bug rather than bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace narrow
