#pragma once

#include <stdexcept>
#include <string>

namespace mbrl {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameters or configuration (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

/// Violated data invariant: non-stochastic rows, unnormalized rewards,
/// inconsistent datasets, broken realizability (CLI exit code 3).
struct InvariantError : Error {
    using Error::Error;
};

/// Shape mismatch between two objects; the message names the offending axis.
struct DimensionError : InvariantError {
    using InvariantError::InvariantError;
};

}  // namespace mbrl
