#pragma once

#include <stdexcept>
#include <string>

namespace pdm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, traces, fleets).
class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid or contradictory configuration (flags, grids, config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Two CDF points that do not determine a two-parameter fit.
class DegenerateFitError : public InputError {
 public:
  using InputError::InputError;
};

// A unit whose perfect-prognostics baseline cannot be realised on the grid.
class InfeasiblePerfectError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace pdm
