#pragma once

#include <stdexcept>
#include <string>

namespace qfb {

/// Base of every error raised by the library. Each subclass maps onto one of
/// the CLI exit statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

/// Bad command line: unknown flag, malformed value, inconsistent options.
class UsageError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// A physical or numerical parameter outside its admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Closed form evaluated on its removable singularity; use the ODE path.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidOperatorError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidStateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The generator has more than one stationary state.
class DegenerateSteadyStateError : public DomainError {
 public:
  DegenerateSteadyStateError(const std::string& what, int null_dim)
      : DomainError(what), null_dim_(null_dim) {}
  int null_space_dimension() const noexcept { return null_dim_; }

 private:
  int null_dim_;
};

/// Numerical accuracy or internal-consistency failure (step too coarse,
/// oracle disagreement, negative Fisher information beyond noise).
class AccuracyError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 5; }
};

}  // namespace qfb
