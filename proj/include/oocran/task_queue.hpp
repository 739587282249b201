#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "oocran/common.hpp"

namespace oocran {

enum class TaskKind { DEPLOY_VNF, DELETE_VNF, RECONFIGURE_VNF, ALLOCATE_SLICE, RELEASE_SLICE, RUN_ACTUATOR };
enum class TaskState { QUEUED, RUNNING, DONE, FAILED };

std::string_view to_string(TaskKind k);
std::string_view to_string(TaskState s);

struct Task {
    TaskId task_id;
    NsId ns_id;
    TaskKind kind = TaskKind::DEPLOY_VNF;
    Params payload;
    int attempts = 0;
    TaskState state = TaskState::QUEUED;
    std::string last_error;
};

struct TaskLogEntry {
    TaskId task_id;
    NsId ns_id;
    TaskKind kind;
    int attempt;
    TaskState outcome;  // DONE, FAILED, or QUEUED for a retry
    std::string error;
};

struct TaskQueueConfig {
    int max_retries = 3;
    Duration backoff{std::chrono::milliseconds(100)};
    bool sleep_on_retry = false;  // REALTIME clocks back off; VIRTUAL runs retry immediately
};

/// In-process work queue. Tasks of one NS run strictly in enqueue order;
/// tasks of different NSs may interleave.
class TaskQueue {
public:
    /// Executes a task's side effect. Throwing counts as a failed attempt.
    using Driver = std::function<void(const Task&)>;
    using LivenessCheck = std::function<bool(NsId)>;
    using FailureHandler = std::function<void(const Task&)>;

    explicit TaskQueue(TaskQueueConfig config = {});

    void set_driver(TaskKind kind, Driver driver);
    void set_liveness_check(LivenessCheck check);
    void set_failure_handler(FailureHandler handler);

    /// Throws UnknownNS when the liveness check rejects ns_id.
    TaskId enqueue(NsId ns_id, TaskKind kind, Params payload = {});

    /// Runs one attempt of the oldest eligible task. Returns the task once it
    /// settles (DONE or FAILED); nullopt for an empty queue or a retry.
    std::optional<Task> run_worker_step();

    /// Steps until nothing is eligible; returns the number of attempts made.
    std::size_t drain();

    /// Marks every QUEUED task of `ns_id` FAILED without running it.
    std::vector<TaskId> cancel(NsId ns_id, const std::string& reason);

    bool has_pending(NsId ns_id) const;
    std::size_t pending() const;
    Task task(TaskId id) const;
    std::vector<TaskLogEntry> log() const;
    /// One line per log entry: "task-3 ns-1 DEPLOY_VNF attempt=1 DONE".
    std::string export_log() const;

private:
    std::optional<TaskId> pick_locked();

    mutable std::mutex mu_;
    TaskQueueConfig config_;
    std::map<TaskKind, Driver> drivers_;
    LivenessCheck alive_;
    FailureHandler on_failure_;
    std::map<TaskId, Task> tasks_;  // ordered by id == enqueue order
    std::vector<TaskLogEntry> log_;
    std::uint64_t next_id_ = 0;
};

}  // namespace oocran
