#pragma once

#include <stdexcept>
#include <string>

namespace randent {

/// Argument outside an operation's domain (bad index, odd n for a symmetric cut, unknown name).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Input failed a numerical precondition, e.g. a matrix that is not unitary.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Requested problem size exceeds a memory ceiling.
class CapacityError : public std::length_error {
  public:
    using std::length_error::length_error;
};

/// Operation not available for this input (e.g. Markov chain of a non-Clifford gate).
class UnsupportedError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of a numerical procedure on valid input.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Iterative solver ran out of iterations; carries the best residual reached.
class ConvergenceError : public NumericError {
  public:
    ConvergenceError(const std::string &what, double best_residual)
        : NumericError(what), best_residual_(best_residual) {}

    [[nodiscard]] double best_residual() const noexcept { return best_residual_; }

  private:
    double best_residual_;
};

/// Spectrum does not have the structure an operation relies on (e.g. unit multiplicity != 2).
class StructuralError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// A fit was asked for with too few usable data points.
class InsufficientDataError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// Nonlinear fit failed to converge.
class FitError : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace randent
