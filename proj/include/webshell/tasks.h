#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <stop_token>
#include <string>

namespace webshell {

enum class TaskStatus { Running, Done, Fail };

std::string to_string(TaskStatus s);  // WS_THREAD_RUNNING / _DONE / _FAIL

/// Cooperative cancellation token handed to task work units. Work should
/// check it at its cancellation points (between script commands, between
/// network operations) and bail by throwing CancelledError.
class CancelToken {
public:
    CancelToken() = default;
    explicit CancelToken(std::stop_token t) : token_(std::move(t)) {}

    bool cancelled() const { return token_.stop_requested(); }
    /// Throws CancelledError when cancellation has been requested.
    void checkpoint() const;
    /// Sleep that wakes early on cancellation (and then throws).
    void sleep_for(std::chrono::milliseconds ms) const;

private:
    std::stop_token token_;
};

using TaskId = uint64_t;
using TaskWork = std::function<std::string(const CancelToken&)>;

/// Create a handle without starting work (ws::thread new). Reported status is
/// RUNNING until the work settles.
TaskId task_create();

/// Bind work to a fresh handle and start it immediately.
TaskId task_spawn(TaskWork work);

/// Start work on a created handle. A second exec on the same handle errors.
void task_exec(TaskId id, TaskWork work);

TaskStatus task_status(TaskId id);

/// The task's result text; only readable in DONE, errors otherwise.
std::string task_result(TaskId id);

/// The failure description; only readable in FAIL.
std::string task_failure(TaskId id);

/// Request cancellation if still running, then release the handle. Every
/// subsequent operation on the handle errors.
void task_destroy(TaskId id);

/// Number of live (not yet destroyed) handles — leak audit hook.
size_t live_task_count();

/// Number of worker threads currently executing — cancellation test hook.
size_t active_worker_count();

/// The Figure-9 timeout discipline: spawn work, poll its status every
/// timeslot, return the result if it finishes in time, otherwise destroy the
/// task and raise TaskFailError ("WS_THREAD_FAIL"; reason "timeout" or
/// "failed"). A task failure breaks the wait early.
std::string with_timeout(TaskWork work, std::chrono::milliseconds timeout,
                         std::chrono::milliseconds timeslot = std::chrono::milliseconds(500));

} // namespace webshell
