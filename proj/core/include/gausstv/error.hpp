#pragma once

#include <stdexcept>
#include <string>

namespace gausstv {

// Raised for malformed inputs: bad grid parameters, inconsistent fields,
// violated preconditions of an operation.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gausstv
