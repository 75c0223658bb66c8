#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ellipstab {

// Base for all library errors; `what()` carries a human-readable reason.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched variable counts or modes between operands.
struct DimensionError : Error {
    using Error::Error;
};

// Invalid parameter values (nonpositive radius, bad order, ...).
struct DomainError : Error {
    using Error::Error;
};

// An exact resonance k.alpha = 0 was hit; `witness` is the offending k.
struct ResonanceError : Error {
    std::vector<long long> witness;
    ResonanceError(const std::string& msg, std::vector<long long> k)
        : Error(msg), witness(std::move(k)) {}
};

// Quadratic part of a Hamiltonian does not match the declared frequencies.
struct NormalizationError : Error {
    using Error::Error;
};

// T*omega fails to be an integer vector.
struct PeriodError : Error {
    using Error::Error;
};

// A normal-form threshold inequality failed; `inequality` names which one.
struct ThresholdError : Error {
    std::string inequality;
    ThresholdError(const std::string& msg, std::string which)
        : Error(msg), inequality(std::move(which)) {}
};

// An internal consistency check failed: a build bug, not a user error.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace ellipstab
