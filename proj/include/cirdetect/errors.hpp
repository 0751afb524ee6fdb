#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cirdetect {

// Root of every error the library raises on bad input or degenerate data.
// Anything else escaping the library is an internal fault.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// A quantity is requested outside its mathematical domain, e.g. a
// stationary moment of an order for which it diverges.
class DomainError : public Error {
public:
    using Error::Error;
};

class DegeneratePathError : public Error {
public:
    using Error::Error;
};

class SingularWindowError : public Error {
public:
    SingularWindowError(const std::string& what, double det_q)
        : Error(what), det_q_(det_q) {}

    double det_q() const noexcept { return det_q_; }

private:
    double det_q_;
};

class MatrixDomainError : public Error {
public:
    using Error::Error;
};

class PathFormatError : public Error {
public:
    enum class Kind { io, malformed_row, non_uniform_grid, negative_value, too_short };

    PathFormatError(Kind kind, std::size_t line, const std::string& what)
        : Error(what), kind_(kind), line_(line) {}

    Kind kind() const noexcept { return kind_; }
    // 1-based line number in the source file, 0 when not tied to a line.
    std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

}  // namespace cirdetect
