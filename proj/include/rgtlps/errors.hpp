#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rgtlps {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Observation data that cannot be used (value at or outside the unit interval).
class DataError : public std::invalid_argument {
 public:
  DataError(const std::string& what, std::size_t index)
      : std::invalid_argument(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// Numerical procedure failed to converge within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken mathematical guarantee; indicates a defect, not bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rgtlps
