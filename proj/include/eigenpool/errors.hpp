#pragma once

#include <stdexcept>
#include <string>

namespace eigenpool {

// Bad arguments, malformed files, violated preconditions. The CLI maps this
// to exit code 2.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A computation that could not be completed in floating point (empty
// truncation interval, non-positive definite factorization, ...). Exit code 3.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace eigenpool
