#pragma once

#include <stdexcept>

namespace antijam {

// Raised when a caller violates an operation's precondition (wrong shape,
// acting on a finished episode, syncing a network that does not exist).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a buffer holds fewer items than a sample request needs.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace antijam
