#pragma once

#include <stdexcept>
#include <string>

namespace heppo {

/// Raised when an input violates an operation's preconditions.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Misuse of the FILO stack memory (underflow, overflow, out-of-order access).
class StackError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace heppo
