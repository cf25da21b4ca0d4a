#pragma once

#include <stdexcept>
#include <string>

namespace gibbs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (bad JSON, asymmetric tables, unknown sites).
class InputError : public Error {
public:
    using Error::Error;
};

/// A documented size guard or operation contract was violated, e.g. an
/// enumeration that would exceed its budget or a whole-system query on an
/// implicit lattice.
class GuardError : public Error {
public:
    using Error::Error;
};

/// The LP or stationarity solver could not produce a trustworthy answer.
class SolverError : public Error {
public:
    using Error::Error;
};

}  // namespace gibbs
