#pragma once

#include <stdexcept>
#include <string>

namespace qhydro {

// Invalid input: bad grid, mismatched shapes, malformed configuration.
// The CLI maps this to exit status 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that started from valid input but could not finish:
// non-finite intermediate state, instability, non-convergence.
// The CLI maps this to exit status 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field configuration outside the physical domain of a nonlinear law
// (e.g. a super-critical Born-Infeld field).
class DomainError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace qhydro
