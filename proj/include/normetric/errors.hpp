#pragma once

#include <stdexcept>
#include <string>

namespace normetric {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Sequences that must line up (lengths, widths) do not.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A class or cluster distribution is unusable (a zero count, a single class).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A ratio has no value, e.g. zero signal over zero noise.
class UndefinedError : public Error {
public:
    using Error::Error;
};

/// The caller omitted data the selected task requires.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input files: missing, malformed or empty.
class DataError : public Error {
public:
    using Error::Error;
};

class FileError : public DataError {
public:
    using DataError::DataError;
};

class MissingColumnError : public DataError {
public:
    using DataError::DataError;
};

class EmptyDataError : public DataError {
public:
    using DataError::DataError;
};

/// A learning-curve schedule cannot be served by the available data.
class ScheduleError : public Error {
public:
    using Error::Error;
};

/// A stability report cannot be formed from the given points.
class ReportError : public Error {
public:
    using Error::Error;
};

} // namespace normetric
