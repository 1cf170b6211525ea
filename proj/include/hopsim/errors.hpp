#pragma once

#include <stdexcept>
#include <string>

namespace hopsim {

// Numerical failures. The CLI maps these to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonconvergentEvent : NumericalError {
  using NumericalError::NumericalError;
};

struct StepUnderflow : NumericalError {
  using NumericalError::NumericalError;
};

// A reset landed on or past the next guard, or a grazing contact was detected.
struct DegenerateExecution : NumericalError {
  using NumericalError::NumericalError;
};

struct InversionFailure : NumericalError {
  using NumericalError::NumericalError;
};

struct MaxIterations : NumericalError {
  using NumericalError::NumericalError;
};

struct FixedPointNotFound : NumericalError {
  using NumericalError::NumericalError;
};

// Touchdown velocity outside the valid set V = {v : v2 < -2*rho_l/T_s}.
struct InvalidTouchdown : NumericalError {
  using NumericalError::NumericalError;
};

struct SingularM2 : NumericalError {
  using NumericalError::NumericalError;
};

// Bad configuration (unknown key, invariant violation). CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hopsim
