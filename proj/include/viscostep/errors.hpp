#pragma once

#include <stdexcept>
#include <string>

namespace viscostep {

// Everything the library throws derives from this, so callers can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid input state or parameters.
struct NonPositiveDeterminant : Error {
  using Error::Error;
};

struct NotSpd : Error {
  using Error::Error;
};

struct SingularTensor : Error {
  using Error::Error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

// Solver failures. DegenerateStep: the classical EBM prefactor became non-positive,
// i.e. the step is too large for the uncorrected scheme.
struct DegenerateStep : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  using Error::Error;
};

struct LateralSolveFailure : Error {
  using Error::Error;
};

// An integrator failed mid-march; the message carries the step index, the
// time and the underlying error.
struct StepFailure : Error {
  using Error::Error;
};

// Driver / front-end errors.
struct GridMismatch : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace viscostep
