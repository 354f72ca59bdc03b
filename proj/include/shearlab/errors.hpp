#pragma once

#include <stdexcept>
#include <string>

namespace shearlab {

/// Bad user input: malformed config, out-of-range sizes, unknown names.
/// Maps to CLI exit code 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A structural hypothesis on the flow failed or cannot be quantified
/// (degenerate profile, mismatched critical points, infeasible constants).
/// Maps to CLI exit code 2, same as an ordinary validation failure.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown at run time: failed solve, non-finite values,
/// insufficient decay for a fit. Maps to CLI exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Mass reached the artificial boundary of a truncated-line run.
struct TruncationError : NumericalError {
  explicit TruncationError(const std::string& what) : NumericalError(what) {}
};

/// A trajectory does not decay enough (or has too few samples) to fit a rate.
struct InsufficientDecayError : NumericalError {
  explicit InsufficientDecayError(const std::string& what) : NumericalError(what) {}
};

}  // namespace shearlab
