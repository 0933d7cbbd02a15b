#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixrough {

/// Argument outside the mathematical domain of a function (negative time, H outside (0,1), ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a precondition: mismatched grids, bad shapes, misordered nodes.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The Gaussian sampler could not produce a valid factorization.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time-stepping scheme produced a non-finite state.
class SolveError : public std::runtime_error {
 public:
  SolveError(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractError(message);
}

}  // namespace detail
}  // namespace mixrough
