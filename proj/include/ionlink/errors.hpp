#pragma once

#include <stdexcept>
#include <string>

namespace ionlink {

// Raised when an operation would exceed the photon-number truncation.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for inputs that violate an operation's preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a statistical estimate lacks samples for some term.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ionlink
