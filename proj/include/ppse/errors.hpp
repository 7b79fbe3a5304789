#pragma once

#include <stdexcept>
#include <string>

namespace ppse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : Error {
  using Error::Error;
};

struct Unstable : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct NotPsd : Error {
  using Error::Error;
};

struct NotErgodic : Error {
  using Error::Error;
};

struct Overflow : Error {
  using Error::Error;
};

struct InconsistentInput : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ConfigMismatch : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace ppse
