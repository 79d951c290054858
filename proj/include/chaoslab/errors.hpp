#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chaoslab {

/// Configuration space or table size beyond what the exact engine will enumerate.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed its own convergence check.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside one disorder replica of a quenched average.
class ReplicaError : public std::runtime_error {
 public:
  ReplicaError(std::size_t replica, const std::string& what)
      : std::runtime_error("disorder replica " + std::to_string(replica) + ": " + what),
        replica_(replica) {}
  std::size_t replica() const noexcept { return replica_; }

 private:
  std::size_t replica_;
};

}  // namespace chaoslab
