// errors.hpp: Exception hierarchy shared by all plasmon_qi modules

#pragma once

#include <stdexcept>
#include <string>

namespace plasmon_qi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the documented domain of a numerical routine.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Configuration or physical-invariant violation detected at load/construct time.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Base for failures of a numerical algorithm on otherwise valid input.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double achieved_error)
        : NumericalError(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

class SingularSystemError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketingError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NormViolationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class CacheMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace plasmon_qi
