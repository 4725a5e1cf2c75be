#pragma once

#include <stdexcept>
#include <string>

namespace fogplace {

/// Base of every error raised by the library. CLI exit codes are keyed off
/// the concrete subclass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

/// Data is well formed but cannot support the requested computation
/// (too few distinct values, infeasible capacity, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Instance too large for the exact solver.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// A checked internal invariant failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : Error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace fogplace
