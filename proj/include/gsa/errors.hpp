#pragma once

#include <stdexcept>
#include <string>

namespace gsa {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Player count outside [1, kMaxPlayers].
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration requested beyond its size guard.
class ComplexityError : public Error {
 public:
  using Error::Error;
};

/// Proportional values need strictly positive values on every nonempty
/// coalition; games with nulls go through proportional_values_extended.
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// Constant output (zero total variance / zero grand-coalition value).
class DegenerateGameError : public Error {
 public:
  using Error::Error;
};

/// Cholesky failure or a singular conditioning block.
class LinearAlgebraError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (CSV tables, data sets).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace gsa
