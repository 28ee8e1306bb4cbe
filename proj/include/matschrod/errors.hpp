#pragma once

#include <stdexcept>
#include <string>

namespace matschrod {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition: bad sizes, bad parameters, mismatched grids.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Diffusion samples with smallest eigenvalue <= 0.
class EllipticityError : public Error {
 public:
  using Error::Error;
};

// The requested inequality is not proved for this discretization
// (non-diagonal Q for the projection and positivity checks).
class GuaranteeUnavailable : public Error {
 public:
  using Error::Error;
};

// Iterative solver did not reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace matschrod
