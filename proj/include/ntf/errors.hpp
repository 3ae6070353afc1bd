#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ntf {

/// Structural problems: mismatched shapes, inconsistent ranks, bad axes.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Values outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed, truncated, or oversized on-disk data.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text parse failure; carries the 1-based line number of the offending line.
class ParseError : public FormatError {
public:
    ParseError(const std::string& message, std::size_t line)
        : FormatError("line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Non-finite objective or other numerical breakdown inside a fit.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ntf
