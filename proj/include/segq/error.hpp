#pragma once

#include <stdexcept>
#include <string>

namespace segq {

// Bad caller input: malformed policy, parameter out of range, mismatched sizes.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The model itself cannot produce an answer (singular system, degenerate
// decomposition, non-convergence).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Arrival rate at or above the attended channel rate.
class UnstableError : public ModelError {
public:
    using ModelError::ModelError;
};

} // namespace segq
