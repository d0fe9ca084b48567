#pragma once

#include <stdexcept>
#include <string>

namespace least {

/// Operands whose dimensions do not conform.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dense oracle was asked to work on a matrix larger than its guard.
class GuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Malformed Matrix-Market, CSV or JSON input.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN or Inf produced during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace least
