#pragma once

#include <stdexcept>
#include <string>

namespace ergopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Syntax error inside a potential / branch expression.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

// Numeric domain fault during expression evaluation (log of a non-positive
// value, sqrt of a negative, division by zero, invalid pow).
struct DomainError : Error {
    DomainError(const std::string& msg, std::size_t offset)
        : Error(msg + " (operator at byte " + std::to_string(offset) + ")"), offset(offset) {}
    std::size_t offset;
};

// Bad problem description (branches do not tile [0,1], g not positive, ...).
struct ConfigError : Error {
    using Error::Error;
};

// An iteration failed to reach its tolerance within its budget.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual(residual) {}
    double residual;
};

// A precondition of an operation does not hold for this problem
// (orientation-reversing map in the piecewise pipeline, degenerate dual, ...).
struct RefusalError : Error {
    using Error::Error;
};

} // namespace ergopt
