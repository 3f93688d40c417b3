#pragma once

#include <stdexcept>
#include <string>

namespace padme {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that violates a documented contract (bad rows, missing ids,
/// infeasible split requests).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A binary or text artifact that cannot be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace padme
