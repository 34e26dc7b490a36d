#pragma once

#include <stdexcept>
#include <string>

namespace covmin {

/// Input violates a documented precondition or schema.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured budget (nodes, enumeration size, divisor count, sieve cap)
/// would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An operation on directed bounds that would not preserve bound semantics.
class DirectionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A mathematical statement the library asserts turned out false at runtime
/// (e.g. an empty good fibre). Always a bug or a broken hypothesis.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace covmin
