#pragma once

#include <stdexcept>
#include <string>

namespace kernelgp {

// Bad shapes, non-positive hyperparameters, malformed traces.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured memory budget would be exceeded (dense materialization).
class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf in an iteration, non-positive Ritz values, failed factorizations.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The operator (or preconditioner) is not SPD: p'Ap <= 0 or r'z <= 0.
class BreakdownError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace kernelgp
