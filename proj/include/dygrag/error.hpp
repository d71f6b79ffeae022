#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dygrag {

enum class ErrorKind {
    Validation,  // caller handed us something that violates a precondition
    Parse,       // malformed file or payload
    Dimension,   // vector sizes disagree with index metadata
    Compat,      // artifacts built with a different configuration
    Io,
    Transport,   // network failure or retries exhausted
    Protocol,    // non-2xx answer from a model endpoint
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Malformed input file; `line()` is 1-based, 0 when the problem is not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line)
        : Error(ErrorKind::Parse, line ? message + " (line " + std::to_string(line) + ")" : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class GatewayError : public Error {
public:
    GatewayError(ErrorKind kind, const std::string& message, int status = 0,
                 std::string body_excerpt = {})
        : Error(kind, message), status_(status), body_excerpt_(std::move(body_excerpt)) {}

    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_excerpt_; }

private:
    int status_;
    std::string body_excerpt_;
};

}  // namespace dygrag
