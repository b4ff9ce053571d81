#pragma once

#include <stdexcept>
#include <string>

namespace alq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Parameter record failed validation.
class InvalidParameter : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// The effective mass matrix of the arm/body system is singular.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// Equilibrium solve did not converge within its iteration budget.
class NoEquilibrium : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinite sample reached a stateful filter or estimator.
class PoisonedSignal : public Error {
 public:
  using Error::Error;
};

/// A value fell outside the interval an operation is defined on.
class OutOfRange : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Hamiltonian has eigenvalues on (or numerically at) the imaginary axis.
class NotStabilizable : public Error {
 public:
  using Error::Error;
};

/// A basis or system matrix is too ill-conditioned to trust the result.
class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// Pole placement was requested for an unobservable pair.
class PlacementError : public Error {
 public:
  using Error::Error;
};

/// Signal sample rate does not match the filter design rate.
class RateMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// Percent reduction relative to a zero baseline.
class UndefinedReduction : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration file or value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alq
