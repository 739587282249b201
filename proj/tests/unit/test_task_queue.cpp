#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "oocran/task_queue.hpp"

using namespace oocran;

TEST_CASE("per-NS FIFO") {
    TaskQueue q;
    std::vector<std::string> ran;
    q.set_driver(TaskKind::DEPLOY_VNF, [&](const Task& t) { ran.push_back(t.payload.at("n")); });
    for (auto n : {"a", "b", "c"}) q.enqueue(NsId{1}, TaskKind::DEPLOY_VNF, {{"n", n}});
    CHECK(q.drain() == 3);
    CHECK(ran == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("empty queue step is a no-op") {
    TaskQueue q;
    CHECK_FALSE(q.run_worker_step());
    CHECK(q.pending() == 0);
}

TEST_CASE("liveness check") {
    TaskQueue q;
    q.set_liveness_check([](NsId id) { return id != NsId{9}; });
    try {
        q.enqueue(NsId{9}, TaskKind::DEPLOY_VNF);
        FAIL("expected UnknownNS");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownNS);
    }
}

TEST_CASE("retries") {
    TaskQueueConfig cfg;
    cfg.max_retries = 3;
    TaskQueue q(cfg);
    SUBCASE("fails twice then succeeds") {
        int calls = 0;
        q.set_driver(TaskKind::DEPLOY_VNF, [&](const Task&) {
            if (++calls <= 2) throw std::runtime_error("transient");
        });
        const auto id = q.enqueue(NsId{1}, TaskKind::DEPLOY_VNF);
        q.drain();
        CHECK(q.task(id).state == TaskState::DONE);
        CHECK(q.task(id).attempts == 3);
    }
    SUBCASE("always fails") {
        std::vector<TaskId> failed;
        q.set_driver(TaskKind::DEPLOY_VNF, [](const Task&) { throw std::runtime_error("boom"); });
        q.set_failure_handler([&](const Task& t) { failed.push_back(t.task_id); });
        const auto id = q.enqueue(NsId{1}, TaskKind::DEPLOY_VNF);
        q.drain();
        CHECK(q.task(id).state == TaskState::FAILED);
        CHECK(q.task(id).attempts == 4);
        CHECK(q.task(id).last_error == "boom");
        CHECK(failed == std::vector<TaskId>{id});
    }
}

TEST_CASE("a failed task blocks nothing behind it once finished") {
    TaskQueueConfig cfg;
    cfg.max_retries = 0;
    TaskQueue q(cfg);
    q.set_driver(TaskKind::DEPLOY_VNF, [](const Task&) { throw std::runtime_error("x"); });
    int deleted = 0;
    q.set_driver(TaskKind::DELETE_VNF, [&](const Task&) { ++deleted; });
    q.enqueue(NsId{1}, TaskKind::DEPLOY_VNF);
    q.enqueue(NsId{1}, TaskKind::DELETE_VNF);
    q.drain();
    CHECK(deleted == 1);
}

TEST_CASE("cancel marks queued tasks failed") {
    TaskQueue q;
    q.set_driver(TaskKind::DEPLOY_VNF, [](const Task&) {});
    const auto a = q.enqueue(NsId{1}, TaskKind::DEPLOY_VNF);
    const auto b = q.enqueue(NsId{2}, TaskKind::DEPLOY_VNF);
    CHECK(q.cancel(NsId{1}, "terminated") == std::vector<TaskId>{a});
    CHECK(q.task(a).state == TaskState::FAILED);
    CHECK_FALSE(q.has_pending(NsId{1}));
    CHECK(q.has_pending(NsId{2}));
    q.drain();
    CHECK(q.task(b).state == TaskState::DONE);
}

TEST_CASE("export_log is line-delimited") {
    TaskQueue q;
    q.set_driver(TaskKind::ALLOCATE_SLICE, [](const Task&) {});
    q.enqueue(NsId{1}, TaskKind::ALLOCATE_SLICE);
    q.drain();
    CHECK(q.export_log() == "task-0 ns-1 ALLOCATE_SLICE attempt=1 DONE\n");
}

TEST_CASE("property: log projection per NS equals enqueue order, each task finishes once") {
    std::mt19937 rng(5);
    for (int round = 0; round < 100; ++round) {
        TaskQueueConfig cfg;
        cfg.max_retries = 2;
        TaskQueue q(cfg);
        std::map<TaskId, int> script;  // failures before success; 99 = always fails
        q.set_driver(TaskKind::DEPLOY_VNF, [&](const Task& t) {
            if (t.attempts < script[t.task_id]) throw std::runtime_error("scripted");
        });
        std::map<NsId, std::vector<TaskId>> enqueued;
        for (int i = 0; i < 30; ++i) {
            const NsId ns{rng() % 4};
            const auto id = q.enqueue(ns, TaskKind::DEPLOY_VNF);
            script[id] = (rng() % 5 == 0) ? 99 : static_cast<int>(rng() % 3);
            enqueued[ns].push_back(id);
            if (rng() % 2) q.run_worker_step();
        }
        q.drain();
        std::map<NsId, std::vector<TaskId>> finished;
        std::set<TaskId> terminal;
        for (const auto& e : q.log()) {
            if (e.outcome == TaskState::QUEUED) continue;
            CHECK(terminal.insert(e.task_id).second);
            finished[e.ns_id].push_back(e.task_id);
        }
        CHECK(finished == enqueued);
        for (const auto& [id, fails] : script) {
            const auto t = q.task(id);
            CHECK(t.attempts <= cfg.max_retries + 1);
            CHECK(t.state == (fails > cfg.max_retries ? TaskState::FAILED : TaskState::DONE));
        }
    }
}
