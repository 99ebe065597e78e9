#pragma once

#include <stdexcept>
#include <string>

namespace stormfx {

/// Broad failure class, reported in the CLI's machine-readable error JSON.
enum class ErrorKind {
    InvalidInput,
    DataGap,
    DegenerateKnots,
    RankDeficient,
    Diagnostic,
    NotConverged,
    Io,
    Usage,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_{kind} {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw Error(ErrorKind::InvalidInput, message);
    }
}

} // namespace stormfx
