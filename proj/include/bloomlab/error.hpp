#pragma once

#include <stdexcept>
#include <string>

namespace bloom {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on the arguments does not hold (cube outside the tree,
// finest-level cube where children are needed, wrong dimension, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A computed object fails a property it must have by construction.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Configuration or input-file problem; line is 0 when unknown.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace bloom
