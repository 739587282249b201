#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oocran/common.hpp"

namespace oocran {

enum class VnfRole { ENODEB_TX, ENODEB_RX, UE, CHANNEL_SIM, DATA_SOURCE, SPECTRUM_ANALYZER, CONTROLLER, CORE_FN };
enum class NetworkRole { DATAFLOW, MANAGEMENT };
enum class NsState { PENDING, DEPLOYING, ACTIVE, RECONFIGURING, TERMINATING, TERMINATED, FAILED };
enum class VnfState { BOOTING, RUNNING, RECONFIGURING, STOPPED, ERROR };
enum class ActuatorAction { SCALE_OUT, SCALE_IN, PARTIAL_RECONFIGURE, REDEPLOY_VWI, NOOP };

std::string_view to_string(VnfRole v);
std::string_view to_string(NetworkRole v);
std::string_view to_string(NsState v);
std::string_view to_string(VnfState v);
std::string_view to_string(ActuatorAction v);

// Inverse of to_string; throws ParseError on unknown names.
VnfRole parse_vnf_role(std::string_view s);
NetworkRole parse_network_role(std::string_view s);
NsState parse_ns_state(std::string_view s);
VnfState parse_vnf_state(std::string_view s);
ActuatorAction parse_actuator_action(std::string_view s);

/// Roles that drive a radio front end and therefore need spectrum.
bool is_radio_role(VnfRole role);

struct Flavor {
    int vcpus = 1;
    int ram_mb = 512;

    bool operator==(const Flavor&) const = default;
};

struct RadioRequirements {
    double bandwidth_hz = 1.4e6;
    double tx_power_dbm = 0.0;

    bool operator==(const RadioRequirements&) const = default;
};

struct VnfDescriptor {
    std::string name;
    std::string image;
    Flavor flavor;
    VnfRole role = VnfRole::CORE_FN;
    std::vector<NetworkRole> networks;
    std::optional<RadioRequirements> radio_requirements;

    bool operator==(const VnfDescriptor&) const = default;
};

struct NetworkSpec {
    NetworkRole role = NetworkRole::MANAGEMENT;
    std::string cidr;

    bool operator==(const NetworkSpec&) const = default;
};

struct ActuatorBinding {
    std::string alarm_id;
    std::string actuator;

    bool operator==(const ActuatorBinding&) const = default;
};

struct NsDescriptor {
    std::string name;
    std::vector<VnfDescriptor> vnfs;
    std::vector<ActuatorBinding> actuator_bindings;
    std::vector<NetworkSpec> networks;

    bool operator==(const NsDescriptor&) const = default;
};

struct Violation {
    std::string invariant;  // human-readable statement of the broken rule
    std::string field;      // dotted path to the offending field

    bool operator==(const Violation&) const = default;
};

/// Checks every descriptor invariant. Never throws; an empty result means valid.
std::vector<Violation> validate_descriptor(const NsDescriptor& d);

struct StateEvent {
    NsState from;
    NsState to;
    Timestamp at;

    bool operator==(const StateEvent&) const = default;
};

struct NetworkService {
    NsId id;
    NsDescriptor descriptor;
    NsState state = NsState::PENDING;
    std::vector<VnfId> vnf_instances;
    std::vector<SliceId> slices;
    std::vector<NetworkId> networks;
    Timestamp created_at{0};
    Timestamp state_changed_at{0};
    std::vector<StateEvent> history;
};

bool is_ns_edge(NsState from, NsState to);
bool is_vnf_edge(VnfState from, VnfState to);

/// Returns a new version of `ns` moved to `target` at time `at`, with the
/// transition appended to its history. Throws IllegalTransition for non-edges.
NetworkService transition(const NetworkService& ns, NsState target, Timestamp at);

/// True iff the recorded history is a walk on the NS state graph starting at PENDING.
bool history_is_walk(const NetworkService& ns);

struct VnfInstance {
    VnfId id;
    NsId ns_id;
    VnfDescriptor descriptor;
    std::optional<VmId> vm_id;
    VnfState state = VnfState::BOOTING;
    std::string mgmt_ip;
    std::string dataflow_ip;
    std::optional<SliceId> slice_id;
    std::optional<RrhId> rrh_id;
    std::uint64_t ordinal = 0;  // creation order within the NS
};

struct Actuator {
    std::string name;
    ActuatorAction action = ActuatorAction::NOOP;
    Params parameters;
};

struct Alarm {
    std::string alarm_id;
    AlarmInstanceId instance;
    std::string rule_id;
    VnfId vnf_id;
    Timestamp fired_at{0};
    Params payload;
};

}  // namespace oocran
