#ifndef FSEB_ERROR_HPP
#define FSEB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace fseb {

// Base of everything the library throws. Callers that only care about
// "did the numerics work" catch this.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Argument outside the declared domain of a function or distribution.
class DomainError : public Error {
public:
  using Error::Error;
};

// Root finder endpoints do not straddle a sign change.
class BracketError : public Error {
public:
  BracketError(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }

private:
  double lo_;
  double hi_;
};

// Objective or integrand returned a non-finite value mid-search.
class EvaluationError : public Error {
public:
  EvaluationError(const std::string& what, std::vector<double> point)
      : Error(what), point_(std::move(point)) {}
  [[nodiscard]] const std::vector<double>& point() const { return point_; }

private:
  std::vector<double> point_;
};

// Quadrature did not reach the requested accuracy; carries the best estimate.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& what, double estimate, double error_bound)
      : Error(what), estimate_(estimate), error_bound_(error_bound) {}
  [[nodiscard]] double estimate() const { return estimate_; }
  [[nodiscard]] double error_bound() const { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Hyperparameter estimation failed (optimizer trouble, infeasible moments).
class FitError : public Error {
public:
  using Error::Error;
};

// Data that make a moment estimator undefined (e.g. all proportions 0 or 1).
class DegenerateDataError : public FitError {
public:
  using FitError::FitError;
};

// A model was asked for something it does not implement.
class CapabilityError : public Error {
public:
  using Error::Error;
};

// A comparator quantity cannot be formed from this data (negative variance).
class UncomputableError : public Error {
public:
  using Error::Error;
};

} // namespace fseb

#endif
