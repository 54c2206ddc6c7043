#pragma once

#include <stdexcept>
#include <string>

namespace webshell {

/// Base error for all webshell library failures.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by get_page/post_page when the final response status is not 2xx.
class HttpStatusError : public Error {
public:
    HttpStatusError(int status, const std::string& what)
        : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

/// Raised by with_timeout on task failure or timeout. The message is always
/// "WS_THREAD_FAIL"; reason() distinguishes the two paths for diagnostics.
class TaskFailError : public Error {
public:
    explicit TaskFailError(std::string reason)
        : Error("WS_THREAD_FAIL"), reason_(std::move(reason)) {}
    const std::string& reason() const { return reason_; }

private:
    std::string reason_;
};

/// Raised when a cancelled task reaches a cancellation point.
class CancelledError : public Error {
public:
    CancelledError() : Error("task cancelled") {}
};

/// Script parse or evaluation error. line is 0 when unknown.
class ScriptError : public Error {
public:
    explicit ScriptError(const std::string& what, int line = 0)
        : Error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace webshell
