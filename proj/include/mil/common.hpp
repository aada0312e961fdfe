#pragma once

#include <stdexcept>
#include <string>

namespace mil {

/// Scalar type used by all numeric kernels and the network.
using real_t = double;

/// A caller violated an operation's preconditions (bad shapes, bad ranges,
/// empty inputs).
class InvalidInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation produced non-finite values. Surfaced, never clamped away.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system failure; the message carries the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A run configuration failed validation before any work started.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mil
