#pragma once

#include <stdexcept>
#include <string>

namespace colayers {

// Base of every error thrown by the library. The CLI maps the subclasses
// below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Objective outside the sign domain an oracle or a perturbation accepts.
class SignDomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace colayers
