#pragma once

#include <stdexcept>
#include <string>

namespace esn2 {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Omega is not positive definite (or too close to singular to be usable).
class NonPositiveDefiniteScale : public Error {
 public:
  using Error::Error;
};

class NonFiniteParameter : public Error {
 public:
  using Error::Error;
};

/// Empty, ragged or non-finite observations.
class DatasetError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The integrand returned a non-finite value at some point of the box.
class CubatureError : public Error {
 public:
  using Error::Error;
};

/// An integral hit its evaluation budget before meeting the tolerance.
class CubatureNonConvergence : public CubatureError {
 public:
  using CubatureError::CubatureError;
};

}  // namespace esn2
