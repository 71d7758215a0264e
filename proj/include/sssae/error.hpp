#pragma once

#include <stdexcept>
#include <string>

namespace sssae {

// Base class for every error thrown by the library. The CLI maps these to
// exit codes: ConfigError/ParseError/IoError -> 1, NumericError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatch between arrays. Messages always name both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (frame table, collapse map, config, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a consistency rule
// (non-consecutive frame indices, label out of range, cache/batch mismatch).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or unusable request (empty dataset, bad fraction).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or diverging optimisation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sssae
