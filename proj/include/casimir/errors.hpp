#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace casimir {

// Base for everything the library throws. The CLI maps ConfigError and
// GeometryError to exit code 1 and NumericalError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Parse or invariant failures of geometry input. `line` is 0 when unknown.
class GeometryError : public Error {
 public:
  GeometryError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// A quadrature or series did not reach the requested tolerance within budget.
class AccuracyError : public NumericalError {
 public:
  AccuracyError(const std::string& what, double estimate, double error_bound)
      : NumericalError(what + " (estimate " + std::to_string(estimate) + ", error bound " +
                       std::to_string(error_bound) + ")"),
        estimate_(estimate),
        error_bound_(error_bound) {}
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

// The two bodies overlap at the requested displacement.
class ContactError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverError : public NumericalError {
 public:
  SolverError(const std::string& what, std::vector<double> residual_history = {})
      : NumericalError(what), history_(std::move(residual_history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace casimir
