#pragma once

#include <stdexcept>
#include <string>

namespace projridge {

// Malformed or out-of-domain input. The CLI maps this to exit code 1.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that cannot proceed on valid-looking input (degenerate
// leverage, no admissible tuning point, ...). The CLI maps this to exit code 2.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace projridge
