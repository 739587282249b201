#include "oocran/events.hpp"

#include <cstdio>
#include <sstream>

namespace oocran {

void to_json(nlohmann::json& j, const Event& e) {
    j = nlohmann::json{{"seq", e.seq},
                       {"ts", to_seconds(e.ts)},
                       {"entity_kind", e.entity_kind},
                       {"entity_id", e.entity_id},
                       {"event", e.event}};
    if (!e.detail.is_null()) j["detail"] = e.detail;
}

std::uint64_t EventLog::append(Timestamp ts, std::string entity_kind, std::string entity_id, std::string event,
                               nlohmann::json detail) {
    std::uint64_t seq = 0;
    {
        std::lock_guard lock(mu_);
        seq = events_.size();
        events_.push_back({seq, ts, std::move(entity_kind), std::move(entity_id), std::move(event), std::move(detail)});
    }
    cv_.notify_all();
    return seq;
}

std::vector<Event> EventLog::since(std::uint64_t from_seq) const {
    std::lock_guard lock(mu_);
    if (from_seq >= events_.size()) return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(from_seq), events_.end()};
}

std::size_t EventLog::size() const {
    std::lock_guard lock(mu_);
    return events_.size();
}

std::vector<Event> EventLog::wait_since(std::uint64_t from_seq, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, timeout, [&] { return events_.size() > from_seq; });
    if (from_seq >= events_.size()) return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(from_seq), events_.end()};
}

std::string EventLog::render_text() const {
    std::lock_guard lock(mu_);
    std::ostringstream os;
    char buf[32];
    for (const auto& e : events_) {
        std::snprintf(buf, sizeof buf, "%.6f", to_seconds(e.ts));
        os << buf << ' ' << e.entity_kind << ' ' << e.entity_id << ' ' << e.event << '\n';
    }
    return os.str();
}

}  // namespace oocran
