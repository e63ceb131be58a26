#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ringrc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad parameters, malformed config or task strings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure that invalidates a single configuration.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NonFiniteState : public NumericError {
 public:
  NonFiniteState(std::size_t sample_index, double time_s);
  std::size_t sample_index() const { return sample_index_; }
  double time() const { return time_s_; }

 private:
  std::size_t sample_index_;
  double time_s_;
};

class CalibrationFailed : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularSystem : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace ringrc
