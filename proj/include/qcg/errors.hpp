#pragma once

#include <stdexcept>
#include <string>

namespace qcg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TooLarge : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidKappa : public Error {
 public:
  using Error::Error;
};

class InvalidSpin : public Error {
 public:
  using Error::Error;
};

class NotNormalized : public Error {
 public:
  using Error::Error;
};

class AlreadyActive : public Error {
 public:
  using Error::Error;
};

class NonPositiveOpt : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcg
