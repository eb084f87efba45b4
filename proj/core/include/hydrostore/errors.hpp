#pragma once

#include <stdexcept>
#include <string>

namespace hydrostore {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (e.g. chi outside [0,1]).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Input data or configuration violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Structured-text parse failure; carries the 1-based line number (0 if unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// An iterative solver exhausted its budget. Recoverable by reducing the time step.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Linear system has a nontrivial kernel (Neumann operator without shift).
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// A field that must stay strictly positive did not. Not recoverable.
class PositivityError : public Error {
public:
    using Error::Error;
};

/// A time step could not be completed even at the minimal step size.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, long step_index)
        : Error("step " + std::to_string(step_index) + ": " + what), step_index_(step_index) {}
    long step_index() const noexcept { return step_index_; }

private:
    long step_index_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace hydrostore
