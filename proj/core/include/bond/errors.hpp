#pragma once

#include <stdexcept>
#include <string>

namespace bond {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape or dimension-chain mismatch.
struct dimension_error : error {
    using error::error;
};

/// Invalid numeric argument (negative std, bad bounds, non-finite input...).
struct parameter_error : error {
    using error::error;
};

/// Operation called in the wrong lifecycle state (e.g. backward before forward).
struct state_error : error {
    using error::error;
};

/// Malformed configuration document or unknown keys.
struct config_error : error {
    using error::error;
};

/// Malformed external data file; message carries the offending line.
struct parse_error : error {
    using error::error;
};

/// Training aborted because the loss exploded past the divergence guard.
struct divergence_error : error {
    using error::error;
};

} // namespace bond
