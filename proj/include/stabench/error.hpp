#pragma once

#include <stdexcept>
#include <string>

namespace stabench {

// Invalid input: malformed file, violated precondition, shape mismatch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical breakdown, e.g. a kernel matrix that is not positive definite.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace stabench
