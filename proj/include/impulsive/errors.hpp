#pragma once

#include <stdexcept>
#include <string>

namespace impulsive {

/// Argument outside the mathematical domain of an operation (negative radius,
/// time before the initial time, query past the horizon, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inversion target outside the range covered by a comparison function.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// A function failed its declared class membership (monotonicity, zero at zero).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, missing envelope or incoherent option set.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrator breakdown (step size underflow, non-finite state).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A search over an unbounded parameter ran past its configured horizon.
class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace impulsive
