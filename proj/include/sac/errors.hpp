#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sac {

// Argument outside the open interval where a function is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Constructor or operation precondition violated.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Iterative solve did not meet its residual tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Malformed or out-of-range run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class VersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the ensemble runner when a trajectory fails; carries replay data.
class TrajectoryError : public std::runtime_error {
 public:
  TrajectoryError(std::size_t trajectory_id, std::uint64_t seed,
                  const std::string& what)
      : std::runtime_error("trajectory " + std::to_string(trajectory_id) +
                           " (seed " + std::to_string(seed) + "): " + what),
        trajectory_id_(trajectory_id),
        seed_(seed) {}

  std::size_t trajectory_id() const { return trajectory_id_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t trajectory_id_;
  std::uint64_t seed_;
};

}  // namespace sac
