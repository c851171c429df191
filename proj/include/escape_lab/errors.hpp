#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace escape_lab {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Mismatched vector/matrix sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A partition cell's image under its branch is not a union of cells.
class MarkovViolationError : public std::runtime_error {
 public:
  MarkovViolationError(std::size_t cell, const std::string& what)
      : std::runtime_error(what), cell_(cell) {}
  std::size_t cell() const noexcept { return cell_; }

 private:
  std::size_t cell_;
};

// Refinement produced a cell shorter than the minimum cell length.
class RefinementDegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Both the power iteration and the dense eigensolve failed.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual,
                   std::optional<std::size_t> hole = std::nullopt)
      : std::runtime_error(what), residual_(residual), hole_(hole) {}
  double residual() const noexcept { return residual_; }
  std::optional<std::size_t> hole() const noexcept { return hole_; }

 private:
  double residual_;
  std::optional<std::size_t> hole_;
};

// Survival counts too small or window too short for a rate fit.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace escape_lab
