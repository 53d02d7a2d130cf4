#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gnep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Stacked network action vector w = col{w_1, ..., w_N}.
using ActionProfile = Vector;

/// Inconsistent dimensions or an input that violates a structural invariant.
class StructuralError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An iterate became non-finite or exceeded the divergence threshold.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::size_t iteration, double norm)
      : std::runtime_error("iterate diverged at iteration " + std::to_string(iteration) +
                           " (norm " + std::to_string(norm) + ")"),
        iteration_(iteration), norm_(norm) {}

  std::size_t iteration() const noexcept { return iteration_; }
  double norm() const noexcept { return norm_; }

private:
  std::size_t iteration_;
  double norm_;
};

/// Gradient requested for a penalty that is not differentiable.
class NonDifferentiableError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// An iterative solver stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// A theorem precondition required by the caller does not hold.
class ConditionViolated : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

}  // namespace gnep
