#pragma once

#include <stdexcept>
#include <string>

namespace mscd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer than three distinct points, or all points collinear.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class InvalidParam : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// A preemptive schedule that breaks the chain or timing rules.
class InfeasibleInput : public Error {
 public:
  using Error::Error;
};

// Raised only when an internal invariant is broken; always a bug.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace mscd
