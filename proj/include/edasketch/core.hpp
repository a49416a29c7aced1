#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace edasketch {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Invalid sizes or parameters handed to a constructor or operation.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operand dimensions disagree with the operator they are passed to.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The nonlinear model produced a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int step)
      : std::runtime_error(what), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

// A factorization or Krylov recurrence could not proceed.
class BreakdownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_size(Index actual, Index expected, const char* where) {
  if (actual != expected) {
    throw DimensionError(std::string(where) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace edasketch
