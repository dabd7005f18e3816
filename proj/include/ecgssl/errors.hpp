#pragma once

#include <stdexcept>
#include <string>

namespace ecgssl {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or configuration (maps to CLI exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Bad or insufficient input data (maps to CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: NaN loss, degenerate variance, rank deficiency
/// (maps to CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

// Ingest-specific data errors, each distinct so callers can tell them apart.

class MissingFileError : public DataError {
public:
    using DataError::DataError;
};

class BadBinaryFileError : public DataError {
public:
    using DataError::DataError;
};

class BadTextValueError : public DataError {
public:
    using DataError::DataError;
};

class DuplicateIdError : public DataError {
public:
    using DataError::DataError;
};

} // namespace ecgssl
