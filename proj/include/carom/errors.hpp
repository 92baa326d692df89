#pragma once

#include <stdexcept>
#include <string>

namespace carom {

// Malformed input text (bad field count, non-integer token, ...).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, int line)
        : std::runtime_error(std::move(msg)), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// Well-formed input violating a domain invariant (negative score, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-convergent series or singular solve (lambda = 1, spectral radius >= 1).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Coincident eigenvalues: the two-geometric decomposition does not exist.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A requested reconstruction has no feasible solution.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace carom
