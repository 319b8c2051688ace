#pragma once

#include <stdexcept>
#include <string>

namespace persona {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input could not be read: missing or unwritable file.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed text (JSON syntax, annotation grammar).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input with the wrong structure (joint count, shapes, names).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Structurally valid input carrying an illegal value (NaN, out of range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A loss or optimizer needs more frames than were supplied.
class InsufficientFramesError : public Error {
 public:
  using Error::Error;
};

/// Operands whose dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Semantic content label outside the known vocabulary.
class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

}  // namespace persona
