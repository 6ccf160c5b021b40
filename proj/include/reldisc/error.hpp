#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reldisc {

// Base of every error raised by the library. The CLI maps the three
// families below onto exit codes 2 (validation), 3 (I/O) and 4 (provider).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant or precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A malformed record in a line-oriented file.
class ParseError : public ValidationError {
public:
    ParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Cross-reference between two inputs is broken (e.g. a record id that the
/// corpus does not contain).
class IntegrityError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// An internal consistency check failed; indicates a bug upstream of the
/// reporting stage rather than bad user input.
class InvariantError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Failures talking to an embedding provider or the discussion host.
class ProviderError : public Error {
public:
    using Error::Error;
};

/// Process exit status for an error: 2 validation, 3 I/O, 4 provider,
/// 1 anything else.
inline int exit_code_of(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const ProviderError*>(&e)) return 4;
    return 1;
}

}  // namespace reldisc
