#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace multisvm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied data that violates an operation's preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

/// A file does not follow the documented layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// The filesystem refused a read or write.
class IoError : public Error {
public:
    using Error::Error;
};

/// A statistic is undefined for the given distribution (e.g. chance agreement of 1).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// State of the SMO solver when it ran out of iterations.
struct ConvergenceDiagnostics {
    std::size_t iterations = 0;
    double violation_gap = 0.0;
    double dual_objective = 0.0;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, ConvergenceDiagnostics diagnostics)
        : Error(what), diagnostics_(diagnostics) {}

    const ConvergenceDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    ConvergenceDiagnostics diagnostics_;
};

}  // namespace multisvm
