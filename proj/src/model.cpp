#include "oocran/model.hpp"

#include <array>
#include <set>
#include <utility>

namespace oocran {

namespace {

template <class Enum, std::size_t N>
using NameTable = std::array<std::pair<Enum, std::string_view>, N>;

constexpr NameTable<VnfRole, 8> kVnfRoles{{
    {VnfRole::ENODEB_TX, "ENODEB_TX"},
    {VnfRole::ENODEB_RX, "ENODEB_RX"},
    {VnfRole::UE, "UE"},
    {VnfRole::CHANNEL_SIM, "CHANNEL_SIM"},
    {VnfRole::DATA_SOURCE, "DATA_SOURCE"},
    {VnfRole::SPECTRUM_ANALYZER, "SPECTRUM_ANALYZER"},
    {VnfRole::CONTROLLER, "CONTROLLER"},
    {VnfRole::CORE_FN, "CORE_FN"},
}};

constexpr NameTable<NetworkRole, 2> kNetworkRoles{{
    {NetworkRole::DATAFLOW, "DATAFLOW"},
    {NetworkRole::MANAGEMENT, "MANAGEMENT"},
}};

constexpr NameTable<NsState, 7> kNsStates{{
    {NsState::PENDING, "PENDING"},
    {NsState::DEPLOYING, "DEPLOYING"},
    {NsState::ACTIVE, "ACTIVE"},
    {NsState::RECONFIGURING, "RECONFIGURING"},
    {NsState::TERMINATING, "TERMINATING"},
    {NsState::TERMINATED, "TERMINATED"},
    {NsState::FAILED, "FAILED"},
}};

constexpr NameTable<VnfState, 5> kVnfStates{{
    {VnfState::BOOTING, "BOOTING"},
    {VnfState::RUNNING, "RUNNING"},
    {VnfState::RECONFIGURING, "RECONFIGURING"},
    {VnfState::STOPPED, "STOPPED"},
    {VnfState::ERROR, "ERROR"},
}};

constexpr NameTable<ActuatorAction, 5> kActions{{
    {ActuatorAction::SCALE_OUT, "SCALE_OUT"},
    {ActuatorAction::SCALE_IN, "SCALE_IN"},
    {ActuatorAction::PARTIAL_RECONFIGURE, "PARTIAL_RECONFIGURE"},
    {ActuatorAction::REDEPLOY_VWI, "REDEPLOY_VWI"},
    {ActuatorAction::NOOP, "NOOP"},
}};

template <class Enum, std::size_t N>
std::string_view name_of(const NameTable<Enum, N>& table, Enum v) {
    for (const auto& [e, name] : table) {
        if (e == v) return name;
    }
    return "UNKNOWN";
}

template <class Enum, std::size_t N>
Enum parse_name(const NameTable<Enum, N>& table, std::string_view s, std::string_view what) {
    for (const auto& [e, name] : table) {
        if (name == s) return e;
    }
    throw Error(ErrorCode::ParseError, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::IllegalTransition: return "IllegalTransition";
        case ErrorCode::ValidationFailed: return "ValidationFailed";
        case ErrorCode::InvalidCidr: return "InvalidCidr";
        case ErrorCode::CapacityExhausted: return "CapacityExhausted";
        case ErrorCode::UnknownNetwork: return "UnknownNetwork";
        case ErrorCode::NetworkInUse: return "NetworkInUse";
        case ErrorCode::UnknownVm: return "UnknownVm";
        case ErrorCode::UnknownRrh: return "UnknownRrh";
        case ErrorCode::RrhBusy: return "RrhBusy";
        case ErrorCode::WrongClockMode: return "WrongClockMode";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::SpectrumExhausted: return "SpectrumExhausted";
        case ErrorCode::PowerExceedsLimit: return "PowerExceedsLimit";
        case ErrorCode::UnknownSlice: return "UnknownSlice";
        case ErrorCode::StaleSample: return "StaleSample";
        case ErrorCode::DeliveryFailed: return "DeliveryFailed";
        case ErrorCode::UnknownAlarm: return "UnknownAlarm";
        case ErrorCode::UnknownNS: return "UnknownNS";
        case ErrorCode::QuotaExceeded: return "QuotaExceeded";
        case ErrorCode::ImmutableField: return "ImmutableField";
        case ErrorCode::InvalidPatch: return "InvalidPatch";
        case ErrorCode::DuplicateActuator: return "DuplicateActuator";
        case ErrorCode::UnknownActuator: return "UnknownActuator";
        case ErrorCode::NSNotActive: return "NSNotActive";
        case ErrorCode::InsufficientCapacity: return "InsufficientCapacity";
        case ErrorCode::EmptyRepository: return "EmptyRepository";
        case ErrorCode::SwapTooSoon: return "SwapTooSoon";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::PortInUse: return "PortInUse";
    }
    return "Unknown";
}

std::string_view to_string(VnfRole v) { return name_of(kVnfRoles, v); }
std::string_view to_string(NetworkRole v) { return name_of(kNetworkRoles, v); }
std::string_view to_string(NsState v) { return name_of(kNsStates, v); }
std::string_view to_string(VnfState v) { return name_of(kVnfStates, v); }
std::string_view to_string(ActuatorAction v) { return name_of(kActions, v); }

VnfRole parse_vnf_role(std::string_view s) { return parse_name(kVnfRoles, s, "VNF role"); }
NetworkRole parse_network_role(std::string_view s) { return parse_name(kNetworkRoles, s, "network role"); }
NsState parse_ns_state(std::string_view s) { return parse_name(kNsStates, s, "NS state"); }
VnfState parse_vnf_state(std::string_view s) { return parse_name(kVnfStates, s, "VNF state"); }
ActuatorAction parse_actuator_action(std::string_view s) { return parse_name(kActions, s, "actuator action"); }

bool is_radio_role(VnfRole role) {
    return role == VnfRole::ENODEB_TX || role == VnfRole::ENODEB_RX || role == VnfRole::UE ||
           role == VnfRole::SPECTRUM_ANALYZER;
}

std::vector<Violation> validate_descriptor(const NsDescriptor& d) {
    std::vector<Violation> out;
    auto report = [&](std::string invariant, std::string field) {
        out.push_back({std::move(invariant), std::move(field)});
    };

    if (d.name.empty()) report("NS name must be non-empty", "name");
    if (d.vnfs.empty()) report("an NS needs at least one VNF", "vnfs");

    int mgmt = 0;
    int dataflow = 0;
    for (std::size_t i = 0; i < d.networks.size(); ++i) {
        (d.networks[i].role == NetworkRole::MANAGEMENT ? mgmt : dataflow)++;
        if (d.networks[i].cidr.empty()) report("network cidr must be set", "networks[" + std::to_string(i) + "].cidr");
    }
    if (mgmt != 1) report("exactly one MANAGEMENT network", "networks");
    if (dataflow > 1) report("at most one DATAFLOW network", "networks");

    std::set<std::string> names;
    for (std::size_t i = 0; i < d.vnfs.size(); ++i) {
        const auto& v = d.vnfs[i];
        const std::string at = "vnfs[" + std::to_string(i) + "]";
        if (v.name.empty()) report("VNF name must be non-empty", at + ".name");
        if (!names.insert(v.name).second) report("VNF names are unique within the NS", at + ".name");
        if (v.flavor.vcpus <= 0) report("flavor.vcpus must be a positive integer", at + ".flavor.vcpus");
        if (v.flavor.ram_mb <= 0) report("flavor.ram_mb must be a positive integer", at + ".flavor.ram_mb");
        if (is_radio_role(v.role) && !v.radio_requirements) {
            report("radio roles require non-empty radio_requirements", at + ".radio_requirements");
        }
        if (v.radio_requirements && !(v.radio_requirements->bandwidth_hz > 0.0)) {
            report("radio_requirements.bandwidth_hz must be positive", at + ".radio_requirements.bandwidth_hz");
        }
        bool has_mgmt = false;
        for (auto role : v.networks) {
            if (role == NetworkRole::MANAGEMENT) has_mgmt = true;
            if (role == NetworkRole::DATAFLOW && dataflow == 0) {
                report("VNF references a DATAFLOW network the NS does not declare", at + ".networks");
            }
        }
        if (!has_mgmt) report("every VNF references the MANAGEMENT network", at + ".networks");
    }

    std::set<std::string> alarms;
    for (std::size_t i = 0; i < d.actuator_bindings.size(); ++i) {
        const auto& b = d.actuator_bindings[i];
        const std::string at = "actuator_bindings[" + std::to_string(i) + "]";
        if (b.alarm_id.empty()) report("alarm_id must be non-empty", at + ".alarm_id");
        if (!alarms.insert(b.alarm_id).second) report("alarm_ids in actuator_bindings are unique", at + ".alarm_id");
        if (b.actuator.empty()) report("actuator name must be non-empty", at + ".actuator");
    }
    return out;
}

bool is_ns_edge(NsState from, NsState to) {
    using S = NsState;
    switch (from) {
        case S::PENDING: return to == S::DEPLOYING;
        case S::DEPLOYING: return to == S::ACTIVE || to == S::FAILED;
        case S::ACTIVE: return to == S::RECONFIGURING || to == S::TERMINATING;
        case S::RECONFIGURING: return to == S::ACTIVE || to == S::FAILED;
        case S::TERMINATING: return to == S::TERMINATED;
        case S::FAILED: return to == S::TERMINATING;
        case S::TERMINATED: return false;
    }
    return false;
}

bool is_vnf_edge(VnfState from, VnfState to) {
    using S = VnfState;
    switch (from) {
        case S::BOOTING: return to == S::RUNNING || to == S::ERROR || to == S::STOPPED;
        case S::RUNNING: return to == S::RECONFIGURING || to == S::ERROR || to == S::STOPPED;
        case S::RECONFIGURING: return to == S::RUNNING || to == S::ERROR || to == S::STOPPED;
        case S::ERROR: return to == S::STOPPED;
        case S::STOPPED: return false;
    }
    return false;
}

NetworkService transition(const NetworkService& ns, NsState target, Timestamp at) {
    if (!is_ns_edge(ns.state, target)) {
        throw Error(ErrorCode::IllegalTransition, ns.id.str() + " " + std::string(to_string(ns.state)) + " -> " +
                                                      std::string(to_string(target)));
    }
    NetworkService next = ns;
    next.history.push_back({ns.state, target, at});
    next.state = target;
    next.state_changed_at = at;
    return next;
}

bool history_is_walk(const NetworkService& ns) {
    NsState cur = NsState::PENDING;
    Timestamp last{0};
    for (const auto& e : ns.history) {
        if (e.from != cur || !is_ns_edge(e.from, e.to) || e.at < last) return false;
        cur = e.to;
        last = e.at;
    }
    return cur == ns.state;
}

}  // namespace oocran
