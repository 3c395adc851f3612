#pragma once

#include <stdexcept>
#include <string>

namespace mgrid {

// Bad input from the caller: malformed files, out-of-range parameters,
// violated preconditions. The CLI maps this to exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something inside the optimizer went wrong that valid input cannot explain.
// The CLI maps this to exit status 2.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mgrid
