#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "oocran/common.hpp"

namespace oocran {

struct Event {
    std::uint64_t seq = 0;
    Timestamp ts{0};
    std::string entity_kind;  // "ns", "vnf", "vm", "alarm", "actuator", "swap"
    std::string entity_id;
    std::string event;
    nlohmann::json detail;
};

void to_json(nlohmann::json& j, const Event& e);

/// Append-only, thread-safe event history. Readers poll by sequence number or
/// block until something newer arrives (used by the event stream endpoint).
class EventLog {
public:
    std::uint64_t append(Timestamp ts, std::string entity_kind, std::string entity_id, std::string event,
                         nlohmann::json detail = nullptr);

    /// Events with seq >= from_seq.
    std::vector<Event> since(std::uint64_t from_seq) const;
    std::vector<Event> all() const { return since(0); }
    std::size_t size() const;

    /// Waits up to `timeout` for an event with seq >= from_seq.
    std::vector<Event> wait_since(std::uint64_t from_seq, std::chrono::milliseconds timeout) const;

    /// "ts entity_kind entity_id event", one per line, ts in seconds.
    std::string render_text() const;

private:
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    std::vector<Event> events_;
};

}  // namespace oocran
