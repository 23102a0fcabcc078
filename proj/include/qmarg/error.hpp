#pragma once

#include <stdexcept>
#include <string>

namespace qmarg {

/// Raised for malformed or contract-violating inputs (shape mismatch,
/// non-Hermitian data, inconsistent marginals, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot produce a trustworthy answer.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmarg
