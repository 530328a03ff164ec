#pragma once

#include <stdexcept>
#include <string>

namespace cn {

enum class ErrorCategory {
    config,
    numeric,
    io,
    dead_end,
    malformed_instance,
};

inline const char* to_string(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::numeric: return "numeric";
    case ErrorCategory::io: return "io";
    case ErrorCategory::dead_end: return "dead-end";
    case ErrorCategory::malformed_instance: return "malformed-instance";
    }
    return "unknown";
}

/// Single exception type for the library. The category decides the CLI exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

    /// Same category, message prefixed with a location.
    Error annotated(const std::string& where) const {
        return Error(category_, where + ": " + what());
    }

private:
    ErrorCategory category_;
};

inline Error config_error(const std::string& msg) { return {ErrorCategory::config, msg}; }
inline Error numeric_error(const std::string& msg) { return {ErrorCategory::numeric, msg}; }
inline Error io_error(const std::string& msg) { return {ErrorCategory::io, msg}; }

/// Exit codes: 0 ok, 1 config, 2 numeric, 3 io.
inline int exit_code(ErrorCategory c) noexcept {
    switch (c) {
    case ErrorCategory::numeric: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::config:
    case ErrorCategory::dead_end:
    case ErrorCategory::malformed_instance: return 1;
    }
    return 1;
}

} // namespace cn
