#pragma once

#include <stdexcept>
#include <string>

namespace maxagree {

/// Base class for all library errors. `what()` carries a human-readable
/// diagnostic; `exit_code()` is the process exit code the CLI maps it to.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 2; }
};

/// Malformed or inconsistent input: bad JSON, bad rational syntax,
/// unknown symbols, negative masses, wrong totals, missing fields.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Two objects built over different alphabets were combined.
class AlphabetMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A prefix-length (level) precondition was violated, e.g. restricting
/// a measure to a level it does not live on.
class LevelError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Conditioning on a zero-mass prefix. Always a hard error; callers that
/// want a zero-measure convention must test the mass first.
class ConditioningError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

/// subtract(a, b) was called with b not dominated by a.
class DominationError : public Error {
public:
    using Error::Error;
};

/// A verification check failed where the caller demanded success.
class CheckFailure : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 1; }
};

/// A recoupling policy returned a block with wrong marginals.
class PolicyError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 1; }
};

/// An internal invariant that should be unreachable was violated.
class InternalError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

} // namespace maxagree
