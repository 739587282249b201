#include "oocran/vim.hpp"

#include <algorithm>
#include <sstream>

namespace oocran {

std::uint32_t parse_ipv4(const std::string& text) {
    std::uint32_t addr = 0;
    int octets = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto dot = text.find('.', pos);
        const std::string part = text.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty() || part.size() > 3 || !std::all_of(part.begin(), part.end(), ::isdigit)) {
            throw Error(ErrorCode::InvalidCidr, "bad IPv4 address '" + text + "'");
        }
        const int v = std::stoi(part);
        if (v > 255) throw Error(ErrorCode::InvalidCidr, "bad IPv4 address '" + text + "'");
        addr = (addr << 8) | static_cast<std::uint32_t>(v);
        ++octets;
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    if (octets != 4) throw Error(ErrorCode::InvalidCidr, "bad IPv4 address '" + text + "'");
    return addr;
}

std::string format_ipv4(std::uint32_t a) {
    std::ostringstream os;
    os << (a >> 24) << '.' << ((a >> 16) & 0xff) << '.' << ((a >> 8) & 0xff) << '.' << (a & 0xff);
    return os.str();
}

Ipv4Prefix Ipv4Prefix::parse(const std::string& cidr) {
    const auto slash = cidr.find('/');
    if (slash == std::string::npos) throw Error(ErrorCode::InvalidCidr, "missing prefix length in '" + cidr + "'");
    const std::string len_text = cidr.substr(slash + 1);
    if (len_text.empty() || len_text.size() > 2 || !std::all_of(len_text.begin(), len_text.end(), ::isdigit)) {
        throw Error(ErrorCode::InvalidCidr, "bad prefix length in '" + cidr + "'");
    }
    Ipv4Prefix p;
    p.length = std::stoi(len_text);
    if (p.length > 32) throw Error(ErrorCode::InvalidCidr, "bad prefix length in '" + cidr + "'");
    p.network = parse_ipv4(cidr.substr(0, slash));
    const std::uint32_t mask = p.length == 0 ? 0 : ~std::uint32_t{0} << (32 - p.length);
    if ((p.network & ~mask) != 0) throw Error(ErrorCode::InvalidCidr, "host bits set in '" + cidr + "'");
    return p;
}

std::uint32_t Ipv4Prefix::last_host() const {
    return static_cast<std::uint32_t>(network + size() - 2);
}

std::string Ipv4Prefix::str() const { return format_ipv4(network) + "/" + std::to_string(length); }

std::optional<std::uint32_t> VirtualNetwork::next_ip_cursor() const {
    // Gateway is the first host; assignment starts right after it.
    for (std::uint64_t a = std::uint64_t{gateway()} + 1; a <= prefix.last_host(); ++a) {
        if (!assigned.contains(static_cast<std::uint32_t>(a))) return static_cast<std::uint32_t>(a);
    }
    return std::nullopt;
}

std::uint64_t VirtualNetwork::assignable_count() const { return prefix.size() - 3; }

std::string_view to_string(VmState s) { return s == VmState::BOOTING ? "BOOTING" : "RUNNING"; }

std::string_view to_string(ClockMode m) { return m == ClockMode::VIRTUAL ? "VIRTUAL" : "REALTIME"; }

ClockMode parse_clock_mode(std::string_view s) {
    if (s == "VIRTUAL") return ClockMode::VIRTUAL;
    if (s == "REALTIME") return ClockMode::REALTIME;
    throw Error(ErrorCode::ParseError, "unknown clock mode '" + std::string(s) + "'");
}

Clock::Clock(ClockMode mode) : mode_(mode), origin_(std::chrono::steady_clock::now()) {}

Timestamp Clock::now() const {
    if (mode_ == ClockMode::VIRTUAL) return virtual_now_;
    return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - origin_);
}

void Clock::advance_to(Timestamp t) {
    if (mode_ != ClockMode::VIRTUAL) throw Error(ErrorCode::WrongClockMode, "cannot advance a REALTIME clock");
    if (t < virtual_now_) throw Error(ErrorCode::DomainError, "clock cannot move backwards");
    virtual_now_ = t;
}

Vim::Vim(ClockMode mode) : clock_(mode) {}

HostId Vim::add_host(int vcpus, int ram_mb) {
    if (vcpus < 0 || ram_mb < 0) throw Error(ErrorCode::BadConfig, "host capacity must be non-negative");
    std::lock_guard lock(mu_);
    const HostId id{next_host_++};
    hosts_[id] = ComputeHost{id, vcpus, vcpus, ram_mb, ram_mb};
    return id;
}

RrhId Vim::add_rrh(Point location, double max_bandwidth_hz, double max_tx_power_dbm) {
    if (!(max_bandwidth_hz > 0.0)) throw Error(ErrorCode::BadConfig, "RRH bandwidth must be positive");
    std::lock_guard lock(mu_);
    const RrhId id{next_rrh_++};
    rrhs_[id] = RrhDevice{id, location, max_bandwidth_hz, max_tx_power_dbm, std::nullopt};
    return id;
}

VirtualNetwork Vim::create_network(NetworkRole role, const std::string& cidr) {
    const auto prefix = Ipv4Prefix::parse(cidr);
    // Network, gateway, one assignable address and broadcast: /30 is the smallest usable prefix.
    if (prefix.length > 30) throw Error(ErrorCode::InvalidCidr, cidr + " has fewer than 4 addresses");
    std::lock_guard lock(mu_);
    const NetworkId id{next_net_++};
    auto& net = networks_[id];
    net.id = id;
    net.role = role;
    net.prefix = prefix;
    return net;
}

void Vim::delete_network(NetworkId id) {
    std::lock_guard lock(mu_);
    auto it = networks_.find(id);
    if (it == networks_.end()) throw Error(ErrorCode::UnknownNetwork, id.str());
    if (!it->second.assigned.empty()) throw Error(ErrorCode::NetworkInUse, id.str() + " still has attached NICs");
    networks_.erase(it);
}

VirtualMachine Vim::create_vm(const Flavor& flavor, const std::vector<NetworkId>& networks, double boot_time_s) {
    if (flavor.vcpus <= 0 || flavor.ram_mb <= 0) throw Error(ErrorCode::DomainError, "flavor must be positive");
    if (!(boot_time_s > 0.0)) throw Error(ErrorCode::DomainError, "boot time must be positive");
    std::lock_guard lock(mu_);

    for (auto nid : networks) {
        auto it = networks_.find(nid);
        if (it == networks_.end()) throw Error(ErrorCode::UnknownNetwork, nid.str());
        if (!it->second.next_ip_cursor()) throw Error(ErrorCode::CapacityExhausted, nid.str() + " has no free address");
    }

    auto host = std::find_if(hosts_.begin(), hosts_.end(), [&](const auto& kv) {
        return kv.second.vcpus_free >= flavor.vcpus && kv.second.ram_mb_free >= flavor.ram_mb;
    });
    if (host == hosts_.end()) {
        throw Error(ErrorCode::CapacityExhausted, "no host fits " + std::to_string(flavor.vcpus) + " vcpus / " +
                                                      std::to_string(flavor.ram_mb) + " MB");
    }

    VirtualMachine vm;
    vm.id = VmId{next_vm_++};
    vm.host_id = host->first;
    vm.flavor = flavor;
    vm.boot_deadline = clock_.now() + seconds_to_duration(boot_time_s);
    for (auto nid : networks) {
        auto& net = networks_.at(nid);
        const auto addr = *net.next_ip_cursor();
        net.assigned.insert(addr);
        vm.nics.push_back({nid, format_ipv4(addr)});
    }
    host->second.vcpus_free -= flavor.vcpus;
    host->second.ram_mb_free -= flavor.ram_mb;
    vms_[vm.id] = vm;
    return vm;
}

ReleasedResources Vim::delete_vm(VmId id) {
    std::lock_guard lock(mu_);
    auto it = vms_.find(id);
    if (it == vms_.end()) throw Error(ErrorCode::UnknownVm, id.str());
    const auto& vm = it->second;
    auto& host = hosts_.at(vm.host_id);
    host.vcpus_free += vm.flavor.vcpus;
    host.ram_mb_free += vm.flavor.ram_mb;
    for (const auto& nic : vm.nics) {
        auto net = networks_.find(nic.network);
        if (net != networks_.end()) net->second.assigned.erase(parse_ipv4(nic.ip));
    }
    ReleasedResources out{vm.host_id, vm.flavor.vcpus, vm.flavor.ram_mb, vm.nics};
    vms_.erase(it);
    return out;
}

VirtualMachine Vim::resize_vm(VmId id, const Flavor& flavor) {
    if (flavor.vcpus <= 0 || flavor.ram_mb <= 0) throw Error(ErrorCode::DomainError, "flavor must be positive");
    std::lock_guard lock(mu_);
    auto it = vms_.find(id);
    if (it == vms_.end()) throw Error(ErrorCode::UnknownVm, id.str());
    auto& vm = it->second;
    auto& host = hosts_.at(vm.host_id);
    const int dv = flavor.vcpus - vm.flavor.vcpus;
    const int dr = flavor.ram_mb - vm.flavor.ram_mb;
    if (dv > host.vcpus_free || dr > host.ram_mb_free) {
        throw Error(ErrorCode::CapacityExhausted, host.id.str() + " cannot absorb resize of " + id.str());
    }
    host.vcpus_free -= dv;
    host.ram_mb_free -= dr;
    vm.flavor = flavor;
    return vm;
}

void Vim::attach_rrh(RrhId rrh, VnfId vnf) {
    std::lock_guard lock(mu_);
    auto it = rrhs_.find(rrh);
    if (it == rrhs_.end()) throw Error(ErrorCode::UnknownRrh, rrh.str());
    if (it->second.attached_vnf && *it->second.attached_vnf != vnf) {
        throw Error(ErrorCode::RrhBusy, rrh.str() + " attached to " + it->second.attached_vnf->str());
    }
    it->second.attached_vnf = vnf;
}

void Vim::detach_rrh(RrhId rrh) {
    std::lock_guard lock(mu_);
    auto it = rrhs_.find(rrh);
    if (it == rrhs_.end()) throw Error(ErrorCode::UnknownRrh, rrh.str());
    it->second.attached_vnf.reset();
}

std::optional<RrhId> Vim::find_free_rrh(double bandwidth_hz, double tx_power_dbm) const {
    std::lock_guard lock(mu_);
    for (const auto& [id, r] : rrhs_) {
        if (!r.attached_vnf && r.max_bandwidth_hz >= bandwidth_hz && r.max_tx_power_dbm >= tx_power_dbm) return id;
    }
    return std::nullopt;
}

std::vector<VmEvent> Vim::boot_due_locked(Timestamp t) {
    std::vector<VmEvent> events;
    for (auto& [id, vm] : vms_) {
        if (vm.state == VmState::BOOTING && vm.boot_deadline <= t) {
            vm.state = VmState::RUNNING;
            events.push_back({id, vm.boot_deadline, VmState::BOOTING, VmState::RUNNING});
        }
    }
    // vms_ iterates by id, so a stable sort on deadline leaves ties in id order.
    std::stable_sort(events.begin(), events.end(), [](const VmEvent& a, const VmEvent& b) { return a.at < b.at; });
    return events;
}

std::vector<VmEvent> Vim::advance_clock(double dt_s) {
    if (!(dt_s >= 0.0)) throw Error(ErrorCode::DomainError, "dt must be non-negative");
    std::lock_guard lock(mu_);
    if (clock_.mode() != ClockMode::VIRTUAL) throw Error(ErrorCode::WrongClockMode, "advance_clock needs VIRTUAL mode");
    clock_.advance_to(clock_.now() + seconds_to_duration(dt_s));
    return boot_due_locked(clock_.now());
}

std::vector<VmEvent> Vim::advance_to(Timestamp t) {
    std::lock_guard lock(mu_);
    if (clock_.mode() != ClockMode::VIRTUAL) throw Error(ErrorCode::WrongClockMode, "advance_to needs VIRTUAL mode");
    clock_.advance_to(std::max(t, clock_.now()));
    return boot_due_locked(clock_.now());
}

std::vector<VmEvent> Vim::poll() {
    std::lock_guard lock(mu_);
    return boot_due_locked(clock_.now());
}

std::optional<Timestamp> Vim::next_deadline() const {
    std::lock_guard lock(mu_);
    std::optional<Timestamp> best;
    for (const auto& [id, vm] : vms_) {
        if (vm.state == VmState::BOOTING && (!best || vm.boot_deadline < *best)) best = vm.boot_deadline;
    }
    return best;
}

Timestamp Vim::now() const {
    std::lock_guard lock(mu_);
    return clock_.now();
}

ClockMode Vim::clock_mode() const { return clock_.mode(); }

VirtualMachine Vim::vm(VmId id) const {
    std::lock_guard lock(mu_);
    auto it = vms_.find(id);
    if (it == vms_.end()) throw Error(ErrorCode::UnknownVm, id.str());
    return it->second;
}

bool Vim::has_vm(VmId id) const {
    std::lock_guard lock(mu_);
    return vms_.contains(id);
}

std::vector<VirtualMachine> Vim::vms() const {
    std::lock_guard lock(mu_);
    std::vector<VirtualMachine> out;
    for (const auto& [id, vm] : vms_) out.push_back(vm);
    return out;
}

std::vector<ComputeHost> Vim::hosts() const {
    std::lock_guard lock(mu_);
    std::vector<ComputeHost> out;
    for (const auto& [id, h] : hosts_) out.push_back(h);
    return out;
}

std::vector<VirtualNetwork> Vim::networks() const {
    std::lock_guard lock(mu_);
    std::vector<VirtualNetwork> out;
    for (const auto& [id, n] : networks_) out.push_back(n);
    return out;
}

VirtualNetwork Vim::network(NetworkId id) const {
    std::lock_guard lock(mu_);
    auto it = networks_.find(id);
    if (it == networks_.end()) throw Error(ErrorCode::UnknownNetwork, id.str());
    return it->second;
}

std::vector<RrhDevice> Vim::rrhs() const {
    std::lock_guard lock(mu_);
    std::vector<RrhDevice> out;
    for (const auto& [id, r] : rrhs_) out.push_back(r);
    return out;
}

RrhDevice Vim::rrh(RrhId id) const {
    std::lock_guard lock(mu_);
    auto it = rrhs_.find(id);
    if (it == rrhs_.end()) throw Error(ErrorCode::UnknownRrh, id.str());
    return it->second;
}

bool Vim::can_place(const std::vector<Flavor>& flavors) const {
    std::lock_guard lock(mu_);
    std::vector<ComputeHost> free;
    for (const auto& [id, h] : hosts_) free.push_back(h);
    for (const auto& f : flavors) {
        auto h = std::find_if(free.begin(), free.end(), [&](const ComputeHost& c) {
            return c.vcpus_free >= f.vcpus && c.ram_mb_free >= f.ram_mb;
        });
        if (h == free.end()) return false;
        h->vcpus_free -= f.vcpus;
        h->ram_mb_free -= f.ram_mb;
    }
    return true;
}

nlohmann::json Vim::resource_snapshot() const {
    std::lock_guard lock(mu_);
    nlohmann::json j;
    j["hosts"] = nlohmann::json::array();
    for (const auto& [id, h] : hosts_) {
        j["hosts"].push_back({{"id", id.str()}, {"vcpus_free", h.vcpus_free}, {"ram_mb_free", h.ram_mb_free}});
    }
    j["vms"] = vms_.size();
    j["networks"] = nlohmann::json::array();
    for (const auto& [id, n] : networks_) {
        std::vector<std::string> addrs;
        for (auto a : n.assigned) addrs.push_back(format_ipv4(a));
        j["networks"].push_back({{"role", std::string(to_string(n.role))}, {"cidr", n.prefix.str()}, {"assigned", addrs}});
    }
    j["rrhs"] = nlohmann::json::array();
    for (const auto& [id, r] : rrhs_) {
        j["rrhs"].push_back({{"id", id.str()}, {"attached", r.attached_vnf ? r.attached_vnf->str() : ""}});
    }
    return j;
}

}  // namespace oocran
