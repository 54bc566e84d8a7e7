#pragma once

#include <stdexcept>
#include <string>

namespace rh {

// Base of every error the library throws. The CLI maps the subclasses onto
// exit codes: data problems -> 2, runtime failures -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (missing column, bad number, bad header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a referential or ordering constraint.
class DataError : public Error {
 public:
  using Error::Error;
};

// A numeric argument outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Point outside the domain of a geometric mapping.
class DomainError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class PlannerError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rh
