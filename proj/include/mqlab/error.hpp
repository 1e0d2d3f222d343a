#pragma once

#include <stdexcept>
#include <string>

namespace mqlab {

/// Input violates a documented precondition or invariant.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Reading or writing a file failed; the message carries the path.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An iterative solver exhausted its budget.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace mqlab
