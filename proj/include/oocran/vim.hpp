#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oocran/model.hpp"

namespace oocran {

/// IPv4 prefix with host-address arithmetic.
struct Ipv4Prefix {
    std::uint32_t network = 0;
    int length = 0;

    /// Throws InvalidCidr on malformed text or host bits set.
    static Ipv4Prefix parse(const std::string& cidr);

    std::uint32_t first_host() const { return network + 1; }
    std::uint32_t last_host() const;  // broadcast - 1
    std::uint64_t size() const { return std::uint64_t{1} << (32 - length); }
    std::string str() const;
};

std::string format_ipv4(std::uint32_t addr);
std::uint32_t parse_ipv4(const std::string& text);

struct ComputeHost {
    HostId id;
    int vcpus_total = 0;
    int vcpus_free = 0;
    int ram_mb_total = 0;
    int ram_mb_free = 0;
};

struct Nic {
    NetworkId network;
    std::string ip;
};

enum class VmState { BOOTING, RUNNING };
std::string_view to_string(VmState s);

struct VirtualMachine {
    VmId id;
    HostId host_id;
    Flavor flavor;
    std::vector<Nic> nics;
    Timestamp boot_deadline{0};
    VmState state = VmState::BOOTING;
};

struct VirtualNetwork {
    NetworkId id;
    NetworkRole role = NetworkRole::MANAGEMENT;
    Ipv4Prefix prefix;
    std::set<std::uint32_t> assigned;

    std::uint32_t gateway() const { return prefix.first_host(); }
    /// Lowest free assignable address, if any.
    std::optional<std::uint32_t> next_ip_cursor() const;
    std::uint64_t assignable_count() const;
};

struct RrhDevice {
    RrhId id;
    Point location;
    double max_bandwidth_hz = 20e6;
    double max_tx_power_dbm = 20.0;
    std::optional<VnfId> attached_vnf;
};

enum class ClockMode { VIRTUAL, REALTIME };
std::string_view to_string(ClockMode m);
ClockMode parse_clock_mode(std::string_view s);

/// Monotone simulation clock. VIRTUAL time moves only via advance; REALTIME
/// follows a steady wall clock from construction.
class Clock {
public:
    explicit Clock(ClockMode mode = ClockMode::VIRTUAL);

    ClockMode mode() const { return mode_; }
    Timestamp now() const;
    void advance_to(Timestamp t);

private:
    ClockMode mode_;
    Timestamp virtual_now_{0};
    std::chrono::steady_clock::time_point origin_;
};

struct VmEvent {
    VmId vm;
    Timestamp at;
    VmState from;
    VmState to;
};

struct ReleasedResources {
    HostId host;
    int vcpus = 0;
    int ram_mb = 0;
    std::vector<Nic> nics;
};

class Vim {
public:
    explicit Vim(ClockMode mode = ClockMode::VIRTUAL);

    Vim(const Vim&) = delete;
    Vim& operator=(const Vim&) = delete;

    HostId add_host(int vcpus, int ram_mb);
    RrhId add_rrh(Point location, double max_bandwidth_hz, double max_tx_power_dbm);

    VirtualNetwork create_network(NetworkRole role, const std::string& cidr);
    /// Removes an empty network. Throws UnknownNetwork or NetworkInUse.
    void delete_network(NetworkId id);

    /// First-fit placement by ascending host id; one address per network.
    VirtualMachine create_vm(const Flavor& flavor, const std::vector<NetworkId>& networks, double boot_time_s);
    ReleasedResources delete_vm(VmId id);
    /// In-place flavor change on the resident host. Throws CapacityExhausted if the host cannot absorb the delta.
    VirtualMachine resize_vm(VmId id, const Flavor& flavor);

    void attach_rrh(RrhId rrh, VnfId vnf);
    void detach_rrh(RrhId rrh);
    /// Lowest-id unattached RRH satisfying the bandwidth and power needs.
    std::optional<RrhId> find_free_rrh(double bandwidth_hz, double tx_power_dbm) const;

    /// VIRTUAL only: moves time forward by dt_s and boots every VM whose deadline passed.
    std::vector<VmEvent> advance_clock(double dt_s);
    /// VIRTUAL only: like advance_clock but to an absolute instant.
    std::vector<VmEvent> advance_to(Timestamp t);
    /// REALTIME only: boots VMs whose deadline the wall clock has passed.
    std::vector<VmEvent> poll();
    std::optional<Timestamp> next_deadline() const;

    Timestamp now() const;
    ClockMode clock_mode() const;

    VirtualMachine vm(VmId id) const;
    bool has_vm(VmId id) const;
    std::vector<VirtualMachine> vms() const;
    std::vector<ComputeHost> hosts() const;
    std::vector<VirtualNetwork> networks() const;
    VirtualNetwork network(NetworkId id) const;
    std::vector<RrhDevice> rrhs() const;
    RrhDevice rrh(RrhId id) const;

    /// Dry-run first-fit of `flavors` against current free capacity.
    bool can_place(const std::vector<Flavor>& flavors) const;

    /// Resource state only (free counters, address sets, attachments); ids
    /// and the clock are excluded so leak checks can compare byte-for-byte.
    nlohmann::json resource_snapshot() const;

private:
    std::vector<VmEvent> boot_due_locked(Timestamp t);

    mutable std::mutex mu_;
    Clock clock_;
    std::map<HostId, ComputeHost> hosts_;
    std::map<VmId, VirtualMachine> vms_;
    std::map<NetworkId, VirtualNetwork> networks_;
    std::map<RrhId, RrhDevice> rrhs_;
    std::uint64_t next_host_ = 0;
    std::uint64_t next_vm_ = 0;
    std::uint64_t next_net_ = 0;
    std::uint64_t next_rrh_ = 0;
};

}  // namespace oocran
