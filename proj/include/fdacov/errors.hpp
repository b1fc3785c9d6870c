#pragma once

#include <stdexcept>
#include <string>

namespace fdacov {

// Invalid user-supplied input: bad shapes, domain violations, empty data.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Numerical failure: non-finite values, matrices outside the expected class,
// degenerate systems.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fdacov
