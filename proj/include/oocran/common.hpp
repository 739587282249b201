#pragma once

#include <chrono>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oocran {

/// Every failure the orchestrator can report. The names are part of the wire
/// format (they appear in API error bodies), so keep them stable.
enum class ErrorCode {
    IllegalTransition,
    ValidationFailed,
    InvalidCidr,
    CapacityExhausted,
    UnknownNetwork,
    NetworkInUse,
    UnknownVm,
    UnknownRrh,
    RrhBusy,
    WrongClockMode,
    DomainError,
    SpectrumExhausted,
    PowerExceedsLimit,
    UnknownSlice,
    StaleSample,
    DeliveryFailed,
    UnknownAlarm,
    UnknownNS,
    QuotaExceeded,
    ImmutableField,
    InvalidPatch,
    DuplicateActuator,
    UnknownActuator,
    NSNotActive,
    InsufficientCapacity,
    EmptyRepository,
    SwapTooSoon,
    BadConfig,
    ParseError,
    PortInUse,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Strongly typed numeric identifier. The tag only distinguishes kinds at
/// compile time; the textual form ("vm-3") carries a per-kind prefix.
template <class Tag>
struct Id {
    std::uint64_t value = 0;

    constexpr auto operator<=>(const Id&) const = default;

    std::string str() const { return std::string(Tag::prefix) + "-" + std::to_string(value); }

    static Id parse(std::string_view text) {
        const std::string_view prefix = Tag::prefix;
        if (text.size() <= prefix.size() + 1 || text.substr(0, prefix.size()) != prefix ||
            text[prefix.size()] != '-') {
            throw Error(ErrorCode::ParseError, "malformed id '" + std::string(text) + "'");
        }
        std::uint64_t v = 0;
        for (char c : text.substr(prefix.size() + 1)) {
            if (c < '0' || c > '9') {
                throw Error(ErrorCode::ParseError, "malformed id '" + std::string(text) + "'");
            }
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
        }
        return Id{v};
    }
};

// clang-format off
struct NsTag      { static constexpr std::string_view prefix = "ns"; };
struct VnfTag     { static constexpr std::string_view prefix = "vnf"; };
struct VmTag      { static constexpr std::string_view prefix = "vm"; };
struct HostTag    { static constexpr std::string_view prefix = "host"; };
struct NetTag     { static constexpr std::string_view prefix = "net"; };
struct RrhTag     { static constexpr std::string_view prefix = "rrh"; };
struct SliceTag   { static constexpr std::string_view prefix = "slice"; };
struct TaskTag    { static constexpr std::string_view prefix = "task"; };
struct AlarmTag   { static constexpr std::string_view prefix = "alm"; };
// clang-format on

using NsId = Id<NsTag>;
using VnfId = Id<VnfTag>;
using VmId = Id<VmTag>;
using HostId = Id<HostTag>;
using NetworkId = Id<NetTag>;
using RrhId = Id<RrhTag>;
using SliceId = Id<SliceTag>;
using TaskId = Id<TaskTag>;
/// Identifies one fired alarm instance (as opposed to the rule's alarm_id).
using AlarmInstanceId = Id<AlarmTag>;

/// Simulation timestamps and durations are integral microseconds, so sums of
/// boot times are exact and virtual runs are bit-for-bit reproducible.
using Duration = std::chrono::microseconds;
using Timestamp = Duration;  // offset from the clock epoch

inline Duration seconds_to_duration(double s) {
    return Duration(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

inline double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e6; }

struct Point {
    double x = 0.0;
    double y = 0.0;

    auto operator<=>(const Point&) const = default;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

using Params = std::map<std::string, std::string>;

}  // namespace oocran

template <class Tag>
struct std::hash<oocran::Id<Tag>> {
    std::size_t operator()(const oocran::Id<Tag>& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};
