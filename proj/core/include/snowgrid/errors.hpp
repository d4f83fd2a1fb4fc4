#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace snowgrid {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required input file or directory does not exist.
class MissingInput : public Error {
public:
    using Error::Error;
};

/// Malformed textual input. `line()` is 1-based; 0 when not line-oriented.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, int line = 0)
        : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// A record violates a data invariant.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what, std::optional<int> record_id = std::nullopt)
        : Error(what), record_id_(record_id) {}
    std::optional<int> record_id() const noexcept { return record_id_; }

private:
    std::optional<int> record_id_;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

/// Input is non-empty but carries no spread (e.g. all points coincide).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Transport-level or HTTP failure. `status()` is 0 when no response arrived.
class NetworkError : public Error {
public:
    NetworkError(const std::string& what, int status) : Error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// A remote query succeeded but returned nothing usable.
class EmptyResult : public Error {
public:
    using Error::Error;
};

}  // namespace snowgrid
