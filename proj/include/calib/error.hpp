#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace calib {

// Base class for all toolkit errors. The CLI maps these to exit code 1
// (data errors); flag validation failures exit 2 before any Error is thrown.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid input data tied to a specific line of an input file.
// `line` is 1-based; the message carries it so callers can just print what().
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace calib
