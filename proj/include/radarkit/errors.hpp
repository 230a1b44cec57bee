#pragma once

#include <stdexcept>
#include <string>

namespace radarkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented invariant (non-PSD covariance, bad probe, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A linear-algebra step could not be carried out reliably.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, double condition = 0.0)
      : Error(what), condition_(condition) {}

  /// Condition estimate of the offending matrix, 0 when not applicable.
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Fixed-point or iterative scheme failed to converge.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Particle weights collapsed to zero.
class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Solver stopped without a verdict; never reported as a silent answer.
class IndeterminateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace radarkit
