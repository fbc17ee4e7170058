#pragma once

#include <stdexcept>
#include <string>

namespace fica {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed config, unknown names, out-of-range parameters.
struct ValidationError : Error {
  using Error::Error;
};

// Numerically degenerate inputs: singular covariance, rank-deficient data,
// zero-variance distributions, vanishing alpha denominators.
struct NumericalError : Error {
  using Error::Error;
};

// An experiment that ran but failed its own health checks
// (e.g. trial exclusion rate above the configured ceiling).
struct ExperimentError : Error {
  using Error::Error;
};

}  // namespace fica
