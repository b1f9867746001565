#pragma once

#include <stdexcept>
#include <string>

namespace lgsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands or configuration objects whose dimensions or structure do not fit together.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter outside its admissible range (e.g. epsilon <= 0, M < 3).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A matrix or state that fails its structural invariants (Hermiticity, unitarity, ...).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// The conditional-probability matrix has no left inverse.
class ReconstructionError : public Error {
 public:
  using Error::Error;
};

/// Requested quantity needs data the inputs do not carry.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// A computed probability fell below the clamping floor, or two formulas that must agree did not.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgsim
