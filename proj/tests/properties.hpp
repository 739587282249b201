#pragma once

#include <random>
#include <sstream>

#include "support.hpp"

namespace testsupport {

/// Twelve RRHs 40 m apart, so neighbours fall inside the reuse distance and
/// the 20 MHz pool runs out under load.
inline Scenario crowded_scenario() {
    Scenario s = default_scenario();
    s.rrhs.clear();
    for (int i = 0; i < 12; ++i) s.rrhs.push_back({i, {40.0 * (i % 4), 40.0 * (i / 4)}, 20e6, 20.0});
    s.actuators = {{"grow", ActuatorAction::SCALE_OUT, {{"role", "ENODEB_TX"}, {"step", "1"}}},
                   {"shrink", ActuatorAction::SCALE_IN, {{"role", "ENODEB_TX"}, {"step", "1"}}},
                   {"idle", ActuatorAction::NOOP, {}}};
    return s;
}

struct SequenceOutcome {
    bool interference_free = true;
    bool leak_free = true;
    int ops = 0;
    int rejected = 0;
    int reached_active = 0;
    int failed = 0;
    std::string failure;
};

/// One random create/reconfigure/delete/actuator/time sequence. Spectrum is
/// checked after every operation; at the end every NS is deleted and the
/// resource snapshot must equal the one taken before the first operation.
inline SequenceOutcome random_sequence(std::uint32_t seed, int length = 25) {
    std::mt19937 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    System sys(crowded_scenario());
    auto& e = sys.engine();
    const auto initial = sys.resource_snapshot().dump();
    const double reuse = sys.pool().config().reuse_distance_m;
    const double bandwidths[] = {1.4e6, 3e6, 5e6};
    SequenceOutcome out;
    std::vector<NsId> live;

    auto check = [&](const std::string& op) {
        if (out.interference_free && !interference_free(sys.pool().slices(), reuse)) {
            out.interference_free = false;
            out.failure = "seed " + std::to_string(seed) + ": interference after " + op;
        }
    };

    for (int i = 0; i < length; ++i, ++out.ops) {
        std::string op;
        try {
            switch (pick(0, 5)) {
            case 0: {
                NsDescriptor d = enodebs(pick(1, 4), "ns" + std::to_string(i));
                const double bw = bandwidths[pick(0, 2)];
                for (auto& v : d.vnfs) v.radio_requirements = RadioRequirements{bw, static_cast<double>(pick(0, 20))};
                if (pick(0, 1)) d.vnfs.push_back(vnf("src", VnfRole::DATA_SOURCE, 1));
                d.actuator_bindings = {{"up", "grow"}, {"down", "shrink"}, {"ping", "idle"}};
                op = "create";
                live.push_back(e.create_ns(d).id);
                break;
            }
            case 1:
                if (live.empty()) break;
                op = "delete";
                e.delete_ns(live[static_cast<std::size_t>(pick(0, static_cast<int>(live.size()) - 1))]);
                break;
            case 2: {
                if (live.empty()) break;
                const auto id = live[static_cast<std::size_t>(pick(0, static_cast<int>(live.size()) - 1))];
                op = "reconfigure";
                if (pick(0, 1)) {
                    e.reconfigure_ns(id, parse_patch({{"role_counts", {{"ENODEB_TX", pick(1, 5)}}}}));
                } else {
                    e.reconfigure_ns(id, parse_patch({{"vnfs", {{{"name", "enb-1"}, {"tx_power_dbm", pick(0, 20)}}}}}));
                }
                break;
            }
            case 3: {
                if (live.empty()) break;
                const auto id = live[static_cast<std::size_t>(pick(0, static_cast<int>(live.size()) - 1))];
                const char* alarms[] = {"up", "down", "ping"};
                op = "actuator";
                e.execute_actuator(alarms[pick(0, 2)], id);
                break;
            }
            case 4:
                op = "advance";
                e.advance_to(e.vim().now() + seconds_to_duration(pick(1, 40)));
                break;
            default:
                op = "settle";
                settle(e);
                break;
            }
            sys.after_progress();
        } catch (const Error&) {
            // Rejected commands are part of the sequence; they must not leak either.
            ++out.rejected;
        }
        check(op);
    }

    settle(e);
    for (const auto& ns : e.list()) {
        for (const auto& h : ns.history) out.reached_active += h.to == NsState::ACTIVE;
        out.failed += ns.state == NsState::FAILED;
    }
    for (auto id : live) {
        try {
            e.delete_ns(id);
        } catch (const Error&) {
            // already TERMINATED or TERMINATING
        }
        check("teardown");
    }
    settle(e);
    for (const auto& ns : e.list()) {
        if (ns.state != NsState::TERMINATED && ns.state != NsState::FAILED) {
            out.leak_free = false;
            out.failure = "seed " + std::to_string(seed) + ": " + ns.id.str() + " left in " + std::string(to_string(ns.state));
        }
    }
    if (sys.resource_snapshot().dump() != initial) {
        out.leak_free = false;
        out.failure = "seed " + std::to_string(seed) + ": resources differ after teardown";
    }
    return out;
}

}  // namespace testsupport
