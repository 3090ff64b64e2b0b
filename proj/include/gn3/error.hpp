#pragma once

#include <stdexcept>
#include <string>

namespace gn3 {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the effective domain of an operator (e.g. s not in D(gamma)).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid construction parameters or malformed inputs (sizes, signs, counts).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Right-hand side outside the range of a singular operator.
class IncompatibleData : public Error {
public:
    using Error::Error;
};

/// An iterative procedure failed to reach its tolerance.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Rate fit over data that carries no information (all errors zero).
class DegenerateComparison : public Error {
public:
    using Error::Error;
};

}  // namespace gn3
