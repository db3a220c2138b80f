#pragma once

#include <stdexcept>
#include <string>

namespace fluxswarm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit diffusion number above the stability bound.
class StabilityViolation : public Error {
 public:
  using Error::Error;
};

/// Pressure Poisson solve failed to reach the required residual.
class SolverDivergence : public Error {
 public:
  using Error::Error;
};

/// A policy or critic gradient contained NaN or Inf.
class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

/// Configuration text could not be parsed (syntax or unknown key).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Configuration parsed but violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing run artifacts failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fluxswarm
