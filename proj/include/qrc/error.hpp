#pragma once

#include <stdexcept>
#include <string>

namespace qrc {

// Invalid inputs or configuration. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Requested Hilbert space exceeds the configured qubit cap.
class DimensionOverflow : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Solver or quadrature failure. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replica prediction at or beyond the interpolation threshold (gamma >= 1).
class DivergentPrediction : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qrc
