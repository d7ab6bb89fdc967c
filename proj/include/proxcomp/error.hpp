#pragma once

#include <stdexcept>
#include <string>

namespace proxcomp {

// Base for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Singular or numerically unusable operator.
class SingularError : public Error {
 public:
  using Error::Error;
};

// Malformed user input: unknown atom, syntax error, missing file.
class UserError : public Error {
 public:
  using Error::Error;
};

// A broken invariant inside the compiler or solver.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace proxcomp
