#pragma once

#include <stdexcept>
#include <string>

namespace genboost {

// Base of every exception thrown by the library. The CLI maps each subclass
// to a stable exit code (see cli.hpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed data, configuration or arguments.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Non-finite or otherwise numerically invalid state during computation.
class NumericError : public Error {
public:
    using Error::Error;
};

// File system failures.
class IoError : public Error {
public:
    using Error::Error;
};

// A model file that parses but is not a valid model document.
class FormatError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

} // namespace genboost
