#pragma once

#include <stdexcept>
#include <string>

namespace dsparse {

/// A numeric parameter is outside its admissible range.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Vector or matrix sizes do not agree.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed user input (files, non-finite data, bad JSON).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Covariance matrix is not symmetric positive definite.
class NotSpdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dsparse
