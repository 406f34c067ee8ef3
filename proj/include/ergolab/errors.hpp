#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Argument outside the fundamental domain [0,1) or otherwise out of range.
struct DomainError : Error {
  using Error::Error;
};

/// Malformed construction parameters (bad degree, offset, shape, config).
struct BadParams : Error {
  using Error::Error;
};

/// Sampled derivative dropped to or below 1.
struct NotExpanding : Error {
  using Error::Error;
};

/// Root bracketing / bisection failed (non-monotone branch).
struct ConvergenceError : Error {
  using Error::Error;
};

/// An integrand returned a non-finite value on the support of a measure.
struct NonFinite : Error {
  using Error::Error;
};

/// Too few sample points for the requested refinement depth.
struct UnderSampled : Error {
  using Error::Error;
};

/// Power iteration did not reach the stationarity tolerance.
struct NoConvergence : Error {
  using Error::Error;
};

/// Invalid or unknown experiment configuration key/value.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ergolab
