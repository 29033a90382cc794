#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pxa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad quad, zero-sized input, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Inputs were fine but the computed shape collapsed.
class DegenerateResult : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& detail)
        : Error("line " + std::to_string(line) + ": " + detail), line_(line), detail_(detail) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

// Malformed binary container or configuration document.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace pxa
