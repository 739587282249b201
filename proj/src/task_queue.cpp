#include "oocran/task_queue.hpp"

#include <set>
#include <sstream>
#include <thread>

namespace oocran {

std::string_view to_string(TaskKind k) {
    switch (k) {
        case TaskKind::DEPLOY_VNF: return "DEPLOY_VNF";
        case TaskKind::DELETE_VNF: return "DELETE_VNF";
        case TaskKind::RECONFIGURE_VNF: return "RECONFIGURE_VNF";
        case TaskKind::ALLOCATE_SLICE: return "ALLOCATE_SLICE";
        case TaskKind::RELEASE_SLICE: return "RELEASE_SLICE";
        case TaskKind::RUN_ACTUATOR: return "RUN_ACTUATOR";
    }
    return "UNKNOWN";
}

std::string_view to_string(TaskState s) {
    switch (s) {
        case TaskState::QUEUED: return "QUEUED";
        case TaskState::RUNNING: return "RUNNING";
        case TaskState::DONE: return "DONE";
        case TaskState::FAILED: return "FAILED";
    }
    return "UNKNOWN";
}

TaskQueue::TaskQueue(TaskQueueConfig config) : config_(config) {
    if (config_.max_retries < 0) throw Error(ErrorCode::BadConfig, "max_retries must be >= 0");
}

void TaskQueue::set_driver(TaskKind kind, Driver driver) {
    std::lock_guard lock(mu_);
    drivers_[kind] = std::move(driver);
}

void TaskQueue::set_liveness_check(LivenessCheck check) {
    std::lock_guard lock(mu_);
    alive_ = std::move(check);
}

void TaskQueue::set_failure_handler(FailureHandler handler) {
    std::lock_guard lock(mu_);
    on_failure_ = std::move(handler);
}

TaskId TaskQueue::enqueue(NsId ns_id, TaskKind kind, Params payload) {
    LivenessCheck alive;
    {
        std::lock_guard lock(mu_);
        alive = alive_;
    }
    if (alive && !alive(ns_id)) throw Error(ErrorCode::UnknownNS, ns_id.str() + " is not live");
    std::lock_guard lock(mu_);
    Task t;
    t.task_id = TaskId{next_id_++};
    t.ns_id = ns_id;
    t.kind = kind;
    t.payload = std::move(payload);
    tasks_[t.task_id] = t;
    return t.task_id;
}

std::optional<TaskId> TaskQueue::pick_locked() {
    // An NS is blocked once any of its tasks is queued or running; only the
    // first such task per NS is eligible.
    std::set<NsId> blocked;
    for (auto& [id, t] : tasks_) {
        if (t.state != TaskState::QUEUED && t.state != TaskState::RUNNING) continue;
        if (blocked.insert(t.ns_id).second && t.state == TaskState::QUEUED) return id;
    }
    return std::nullopt;
}

std::optional<Task> TaskQueue::run_worker_step() {
    Task task;
    Driver driver;
    {
        std::lock_guard lock(mu_);
        const auto id = pick_locked();
        if (!id) return std::nullopt;
        auto& t = tasks_.at(*id);
        t.state = TaskState::RUNNING;
        t.attempts += 1;
        task = t;
        if (auto it = drivers_.find(t.kind); it != drivers_.end()) driver = it->second;
    }

    std::string error;
    try {
        if (!driver) throw Error(ErrorCode::BadConfig, "no driver for " + std::string(to_string(task.kind)));
        driver(task);
    } catch (const std::exception& e) {
        error = e.what();
        if (error.empty()) error = "driver failed";
    }

    FailureHandler on_failure;
    Task settled;
    bool retry = false;
    {
        std::lock_guard lock(mu_);
        auto& t = tasks_.at(task.task_id);
        if (error.empty()) {
            t.state = TaskState::DONE;
        } else if (t.attempts <= config_.max_retries) {
            t.state = TaskState::QUEUED;
            t.last_error = error;
            retry = true;
        } else {
            t.state = TaskState::FAILED;
            t.last_error = error;
            on_failure = on_failure_;
        }
        log_.push_back({t.task_id, t.ns_id, t.kind, t.attempts, t.state, error});
        settled = t;
    }
    if (retry) {
        if (config_.sleep_on_retry) std::this_thread::sleep_for(config_.backoff);
        return std::nullopt;
    }
    if (on_failure) on_failure(settled);
    return settled;
}

std::size_t TaskQueue::drain() {
    std::size_t steps = 0;
    for (;;) {
        {
            std::lock_guard lock(mu_);
            if (!pick_locked()) break;
        }
        run_worker_step();
        ++steps;
    }
    return steps;
}

std::vector<TaskId> TaskQueue::cancel(NsId ns_id, const std::string& reason) {
    std::lock_guard lock(mu_);
    std::vector<TaskId> out;
    for (auto& [id, t] : tasks_) {
        if (t.ns_id == ns_id && t.state == TaskState::QUEUED) {
            t.state = TaskState::FAILED;
            t.last_error = reason;
            log_.push_back({t.task_id, t.ns_id, t.kind, t.attempts, t.state, reason});
            out.push_back(id);
        }
    }
    return out;
}

bool TaskQueue::has_pending(NsId ns_id) const {
    std::lock_guard lock(mu_);
    for (const auto& [id, t] : tasks_) {
        if (t.ns_id == ns_id && (t.state == TaskState::QUEUED || t.state == TaskState::RUNNING)) return true;
    }
    return false;
}

std::size_t TaskQueue::pending() const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& [id, t] : tasks_) n += (t.state == TaskState::QUEUED || t.state == TaskState::RUNNING);
    return n;
}

Task TaskQueue::task(TaskId id) const {
    std::lock_guard lock(mu_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw Error(ErrorCode::DomainError, "unknown task " + id.str());
    return it->second;
}

std::vector<TaskLogEntry> TaskQueue::log() const {
    std::lock_guard lock(mu_);
    return log_;
}

std::string TaskQueue::export_log() const {
    std::lock_guard lock(mu_);
    std::ostringstream os;
    for (const auto& e : log_) {
        os << e.task_id.str() << ' ' << e.ns_id.str() << ' ' << to_string(e.kind) << " attempt=" << e.attempt << ' '
           << to_string(e.outcome);
        if (!e.error.empty()) os << " error=\"" << e.error << '"';
        os << '\n';
    }
    return os.str();
}

}  // namespace oocran
