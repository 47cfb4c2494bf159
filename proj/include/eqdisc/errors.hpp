#pragma once

#include <stdexcept>

namespace eqdisc {

/// Violated call contract: bad shapes, out-of-range arguments, mismatched grids.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid or inconsistent experiment configuration (rejected before any work).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inference produced no usable result (all samples diverged, acceptance collapsed, ...).
struct InferenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem or parsing failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace eqdisc
