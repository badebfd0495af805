#pragma once

#include <stdexcept>
#include <string>

namespace gramion {

/// Base for every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, flags, or shapes (exit code 2).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical kernel failed: singular pivot, non-convergence, divergence (exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// File could not be read, written, or parsed (exit code 1).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gramion
