#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace bayesmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector lengths or indices do not match the model.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedTopology : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The constrained space admits no exchange move (n = 0 or n = N).
class NoValidMove : public Error {
 public:
  using Error::Error;
};

/// Requested walk length exceeds min(n, N - n).
class InfeasibleWalk : public Error {
 public:
  using Error::Error;
};

class InvalidRatio : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class TraceTooShort : public Error {
 public:
  using Error::Error;
};

class StateSpaceTooLarge : public Error {
 public:
  using Error::Error;
};

/// Semantic or syntactic problem in an experiment configuration. `key` names
/// the offending JSON field when known; `line` is filled in by the loader.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {}, int line = 0)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace bayesmc
