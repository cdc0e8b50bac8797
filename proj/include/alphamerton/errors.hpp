#pragma once

#include <stdexcept>
#include <string>

namespace alphamerton {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent vector/matrix shapes. `axis()` names the offending dimension.
class DimensionError : public Error {
 public:
  DimensionError(std::string axis, const std::string& what)
      : Error(what), axis_(std::move(axis)) {}
  const std::string& axis() const noexcept { return axis_; }

 private:
  std::string axis_;
};

/// A model or solver parameter violates its contract (sigma <= 0, alpha outside [0,1], ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A coefficient was evaluated outside the factor domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerically singular or ill-conditioned linear system.
class SolverError : public Error {
 public:
  SolverError(double condition_estimate, const std::string& what)
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// Monte Carlo run could not complete (path-failure budget exceeded).
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace alphamerton
