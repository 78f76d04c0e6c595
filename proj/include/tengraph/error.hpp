#pragma once

#include <stdexcept>
#include <string>

namespace tengraph {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor extents that do not line up for the requested operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or insufficient input data (CSV contents, artifact files).
class DataError : public Error {
public:
    using Error::Error;
};

/// Iteration caps exceeded, non-finite values, diverging training.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace tengraph
