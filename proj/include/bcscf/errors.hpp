#pragma once

#include <stdexcept>
#include <string>

namespace bcscf {

/// Base class for all bcscf errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument or configuration value (bad fold count, negative threshold, ...).
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(what) {}
};

/// Malformed input that could not be tokenized (carries the 1-based line number, 0 if n/a).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = 0) : Error(what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Well-formed input that violates a semantic rule (duplicate pair, rating out of range, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Numerical failure (non-positive-definite system, diverged objective, ...).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Filesystem or serialization failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

/// A user or item id that the model's index maps do not know.
class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(const std::string& what) : Error(what) {}
};

}  // namespace bcscf
