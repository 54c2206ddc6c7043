#include "webshell/tasks.h"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "webshell/error.h"

namespace webshell {

std::string to_string(TaskStatus s) {
    switch (s) {
    case TaskStatus::Running: return "WS_THREAD_RUNNING";
    case TaskStatus::Done: return "WS_THREAD_DONE";
    case TaskStatus::Fail: return "WS_THREAD_FAIL";
    }
    return "WS_THREAD_FAIL";
}

void CancelToken::checkpoint() const {
    if (cancelled()) throw CancelledError();
}

void CancelToken::sleep_for(std::chrono::milliseconds ms) const {
    using namespace std::chrono;
    auto deadline = steady_clock::now() + ms;
    while (steady_clock::now() < deadline) {
        checkpoint();
        auto left = duration_cast<milliseconds>(deadline - steady_clock::now());
        std::this_thread::sleep_for(std::min(left, milliseconds(25)));
    }
    checkpoint();
}

namespace {

struct TaskState {
    std::mutex mu;
    TaskStatus status = TaskStatus::Running;
    bool exec_called = false;
    std::string result;
    std::string failure;
    std::stop_source stop;
};

std::atomic<size_t> g_active_workers{0};

// Leaky singleton: detached workers may still reference it during shutdown.
struct Registry {
    std::mutex mu;
    std::map<TaskId, std::shared_ptr<TaskState>> tasks;
    TaskId next_id = 1;
};

Registry& registry() {
    static Registry* r = new Registry;
    return *r;
}

std::shared_ptr<TaskState> find(TaskId id) {
    Registry& r = registry();
    std::lock_guard lock(r.mu);
    auto it = r.tasks.find(id);
    if (it == r.tasks.end()) throw Error("unknown task");
    return it->second;
}

void start_worker(std::shared_ptr<TaskState> state, TaskWork work) {
    CancelToken token(state->stop.get_token());
    std::thread([state = std::move(state), work = std::move(work), token] {
        g_active_workers++;
        std::string result, failure;
        bool ok = false;
        try {
            result = work(token);
            ok = true;
        } catch (const std::exception& e) {
            failure = e.what();
        } catch (...) {
            failure = "unknown failure";
        }
        {
            std::lock_guard lock(state->mu);
            state->status = ok ? TaskStatus::Done : TaskStatus::Fail;
            state->result = std::move(result);
            state->failure = std::move(failure);
        }
        g_active_workers--;
    }).detach();
}

} // namespace

TaskId task_create() {
    Registry& r = registry();
    std::lock_guard lock(r.mu);
    TaskId id = r.next_id++;
    r.tasks[id] = std::make_shared<TaskState>();
    return id;
}

void task_exec(TaskId id, TaskWork work) {
    auto state = find(id);
    {
        std::lock_guard lock(state->mu);
        if (state->exec_called) throw Error("task already executed");
        state->exec_called = true;
    }
    start_worker(std::move(state), std::move(work));
}

TaskId task_spawn(TaskWork work) {
    TaskId id = task_create();
    task_exec(id, std::move(work));
    return id;
}

TaskStatus task_status(TaskId id) {
    auto state = find(id);
    std::lock_guard lock(state->mu);
    return state->status;
}

std::string task_result(TaskId id) {
    auto state = find(id);
    std::lock_guard lock(state->mu);
    if (state->status != TaskStatus::Done)
        throw Error("task result is only readable when the task is done");
    return state->result;
}

std::string task_failure(TaskId id) {
    auto state = find(id);
    std::lock_guard lock(state->mu);
    if (state->status != TaskStatus::Fail)
        throw Error("task failure is only readable when the task has failed");
    return state->failure;
}

void task_destroy(TaskId id) {
    Registry& r = registry();
    std::shared_ptr<TaskState> state;
    {
        std::lock_guard lock(r.mu);
        auto it = r.tasks.find(id);
        if (it == r.tasks.end()) throw Error("unknown task");
        state = it->second;
        r.tasks.erase(it);
    }
    state->stop.request_stop();  // running work stops at its next checkpoint
}

size_t live_task_count() {
    Registry& r = registry();
    std::lock_guard lock(r.mu);
    return r.tasks.size();
}

size_t active_worker_count() {
    return g_active_workers.load();
}

std::string with_timeout(TaskWork work, std::chrono::milliseconds timeout,
                         std::chrono::milliseconds timeslot) {
    if (timeout.count() <= 0) throw Error("timeout must be positive");
    if (timeslot.count() <= 0) throw Error("timeslot must be positive");

    TaskId id = task_spawn(std::move(work));
    bool failed = false;
    std::chrono::milliseconds elapsed{0};
    while (elapsed < timeout) {
        elapsed += timeslot;
        std::this_thread::sleep_for(timeslot);
        TaskStatus status = task_status(id);
        if (status == TaskStatus::Done) {
            std::string result = task_result(id);
            task_destroy(id);
            return result;
        }
        if (status == TaskStatus::Fail) {
            failed = true;  // early termination
            break;
        }
    }
    task_destroy(id);
    throw TaskFailError(failed ? "failed" : "timeout");
}

} // namespace webshell
