#pragma once

#include <stdexcept>

namespace contdp {

// Argument misuse (bad sizes, non-positive scales, out-of-range indices).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Records of different width than the configured dimension d.
struct DimensionMismatchError : ArgumentError {
  using ArgumentError::ArgumentError;
};

// A privacy budget kind the component does not accept directly.
struct BudgetKindError : ArgumentError {
  using ArgumentError::ArgumentError;
};

// Stepping a mechanism past its configured horizon T.
struct HorizonExhaustedError : std::logic_error {
  using std::logic_error::logic_error;
};

// Adversary/simulator protocol breaches: double or missing challenge,
// query budget exceeded.
struct ProtocolViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace contdp
