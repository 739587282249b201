#include "oocran/engine.hpp"

#include <algorithm>
#include <thread>

#include "oocran/serialization.hpp"

namespace oocran {

namespace {

VnfId vnf_arg(const Task& t) { return VnfId::parse(t.payload.at("vnf")); }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string join(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
        if (!out.empty()) out += "; ";
        out += v.field + ": " + v.invariant;
    }
    return out;
}

struct PumpGuard {
    bool& flag;
    explicit PumpGuard(bool& f) : flag(f) { flag = true; }
    ~PumpGuard() { flag = false; }
};

}  // namespace

NsPatch parse_patch(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidPatch, "patch must be an object");
    NsPatch p;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "name") {
                p.name = value.get<std::string>();
            } else if (key == "networks") {
                p.networks = value.get<std::vector<NetworkSpec>>();
            } else if (key == "actuator_bindings") {
                p.actuator_bindings = value.get<std::vector<ActuatorBinding>>();
            } else if (key == "role_counts") {
                for (const auto& [role, count] : value.items()) p.role_counts[parse_vnf_role(role)] = count.get<int>();
            } else if (key == "rule_thresholds") {
                for (const auto& [rule, thr] : value.items()) p.rule_thresholds[rule] = thr.get<double>();
            } else if (key == "vnfs") {
                for (const auto& v : value) {
                    VnfPatch vp;
                    vp.name = v.at("name").get<std::string>();
                    for (const auto& [vk, vv] : v.items()) {
                        if (vk == "name") continue;
                        if (vk == "flavor") {
                            vp.flavor = vv.get<Flavor>();
                        } else if (vk == "tx_power_dbm") {
                            vp.tx_power_dbm = vv.get<double>();
                        } else if (vk == "radio_requirements") {
                            if (vv.contains("tx_power_dbm")) vp.tx_power_dbm = vv.at("tx_power_dbm").get<double>();
                            if (vv.contains("bandwidth_hz")) vp.bandwidth_hz = vv.at("bandwidth_hz").get<double>();
                        } else if (vk == "image") {
                            vp.image = vv.get<std::string>();
                        } else if (vk == "role") {
                            vp.role = parse_vnf_role(vv.get<std::string>());
                        } else if (vk == "networks") {
                            std::vector<NetworkRole> nets;
                            for (const auto& n : vv) nets.push_back(parse_network_role(n.get<std::string>()));
                            vp.networks = nets;
                        } else {
                            throw Error(ErrorCode::InvalidPatch, "unknown VNF patch field '" + vk + "'");
                        }
                    }
                    p.vnfs.push_back(std::move(vp));
                }
            } else {
                throw Error(ErrorCode::InvalidPatch, "unknown patch field '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidPatch, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::InvalidPatch, e.what());
        throw;
    }
    return p;
}

Engine::Engine(Vim& vim, RadioPool& pool, EventLog& events, EngineConfig config)
    : vim_(vim), pool_(pool), events_(events), config_(std::move(config)), queue_([&] {
          auto q = config_.queue;
          q.sleep_on_retry = vim.clock_mode() == ClockMode::REALTIME;
          return q;
      }()) {
    config_.time_model.validate();
    install_drivers();
}

void Engine::install_drivers() {
    queue_.set_liveness_check([this](NsId id) {
        auto it = nss_.find(id);
        return it != nss_.end() && it->second.state != NsState::TERMINATED;
    });
    queue_.set_failure_handler([this](const Task& t) { on_task_failed(t); });
    queue_.set_driver(TaskKind::ALLOCATE_SLICE, [this](const Task& t) { drive_allocate_slice(t); });
    queue_.set_driver(TaskKind::DEPLOY_VNF, [this](const Task& t) { drive_deploy_vnf(t); });
    queue_.set_driver(TaskKind::DELETE_VNF, [this](const Task& t) { drive_delete_vnf(t); });
    queue_.set_driver(TaskKind::RELEASE_SLICE, [this](const Task& t) { drive_release_slice(t); });
    queue_.set_driver(TaskKind::RECONFIGURE_VNF, [this](const Task& t) { drive_reconfigure_vnf(t); });
    queue_.set_driver(TaskKind::RUN_ACTUATOR, [this](const Task& t) { drive_run_actuator(t); });
}

void Engine::log(Timestamp ts, const std::string& kind, const std::string& id, const std::string& event,
                 nlohmann::json detail) {
    events_.append(ts, kind, id, event, std::move(detail));
}

NetworkService& Engine::live(NsId id) {
    auto it = nss_.find(id);
    if (it == nss_.end()) throw Error(ErrorCode::UnknownNS, id.str());
    return it->second;
}

void Engine::set_state(NsId id, NsState target, Timestamp at) {
    auto& ns = live(id);
    const NsState from = ns.state;
    ns = transition(ns, target, at);
    log(at, "ns", id.str(), std::string(to_string(target)), {{"from", std::string(to_string(from))}});
}

double Engine::boot_time_for(int enodeb_ordinal, bool incremental) const {
    const auto& tm = config_.time_model;
    const int k = std::max(enodeb_ordinal, 1);
    double s = estimate_setup_time(k, tm);
    if (incremental) s -= estimate_setup_time(k - 1, tm);
    return std::max(s, 1e-3);
}

std::vector<NetworkId> Engine::networks_for(const NetworkService& ns, const VnfDescriptor& d) const {
    std::vector<NetworkId> out;
    for (auto role : d.networks) {
        for (auto nid : ns.networks) {
            if (vim_.network(nid).role == role) {
                out.push_back(nid);
                break;
            }
        }
    }
    return out;
}

std::vector<Flavor> Engine::footprint(const NsDescriptor& d) {
    std::vector<Flavor> out;
    for (const auto& v : d.vnfs) out.push_back(v.flavor);
    return out;
}

VnfInstance& Engine::add_vnf(NetworkService& ns, const VnfDescriptor& d, double boot_s) {
    VnfInstance v;
    v.id = VnfId{next_vnf_++};
    v.ns_id = ns.id;
    v.descriptor = d;
    v.state = VnfState::BOOTING;
    v.ordinal = v.id.value;
    ns.vnf_instances.push_back(v.id);
    boot_s_[v.id] = boot_s;
    return vnfs_[v.id] = v;
}

std::vector<TaskId> Engine::enqueue_deploy(NetworkService& ns, VnfInstance& v) {
    std::vector<TaskId> ids;
    // Spectrum first: it is the scarcer resource, so a shortage fails before any VM exists.
    if (v.descriptor.radio_requirements) {
        ids.push_back(queue_.enqueue(ns.id, TaskKind::ALLOCATE_SLICE, {{"vnf", v.id.str()}}));
    }
    ids.push_back(queue_.enqueue(ns.id, TaskKind::DEPLOY_VNF, {{"vnf", v.id.str()}}));
    return ids;
}

std::vector<TaskId> Engine::enqueue_teardown(NsId ns, VnfId v) {
    std::vector<TaskId> ids;
    ids.push_back(queue_.enqueue(ns, TaskKind::DELETE_VNF, {{"vnf", v.str()}}));
    const auto& inst = vnfs_.at(v);
    if (inst.descriptor.radio_requirements || inst.slice_id || inst.rrh_id) {
        ids.push_back(queue_.enqueue(ns, TaskKind::RELEASE_SLICE, {{"vnf", v.str()}}));
    }
    return ids;
}

NetworkService Engine::create_ns(const NsDescriptor& descriptor) {
    if (auto violations = validate_descriptor(descriptor); !violations.empty()) {
        throw Error(ErrorCode::ValidationFailed, join(violations));
    }

    std::size_t live_count = 0;
    int live_vcpus = 0;
    for (const auto& [id, ns] : nss_) {
        if (ns.state == NsState::TERMINATED || ns.state == NsState::FAILED) continue;
        ++live_count;
        for (const auto& f : footprint(ns.descriptor)) live_vcpus += f.vcpus;
    }
    int want_vcpus = 0;
    for (const auto& f : footprint(descriptor)) want_vcpus += f.vcpus;
    if (config_.max_live_ns > 0 && live_count >= config_.max_live_ns) {
        throw Error(ErrorCode::QuotaExceeded, "live NS limit " + std::to_string(config_.max_live_ns) + " reached");
    }
    if (config_.max_vcpus > 0 && live_vcpus + want_vcpus > config_.max_vcpus) {
        throw Error(ErrorCode::QuotaExceeded, "vCPU quota " + std::to_string(config_.max_vcpus) + " exceeded");
    }

    std::vector<NetworkId> nets;
    try {
        for (const auto& net : descriptor.networks) nets.push_back(vim_.create_network(net.role, net.cidr).id);
    } catch (...) {
        for (auto n : nets) vim_.delete_network(n);
        throw;
    }

    const Timestamp now = vim_.now();
    NetworkService ns;
    ns.id = NsId{next_ns_++};
    ns.descriptor = descriptor;
    ns.networks = nets;
    ns.created_at = now;
    ns.state_changed_at = now;
    const NsId id = ns.id;
    nss_[id] = ns;
    runtime_[id] = NsRuntime{};
    runtime_[id].last_task_at = now;
    log(now, "ns", id.str(), "PENDING", {{"name", descriptor.name}});
    set_state(id, NsState::DEPLOYING, now);

    auto& live_ns = live(id);
    int enodebs = 0;
    for (const auto& d : descriptor.vnfs) {
        const bool enb = d.role == VnfRole::ENODEB_TX;
        if (enb) ++enodebs;
        auto& v = add_vnf(live_ns, d, boot_time_for(enb ? enodebs : 1, false));
        runtime_[id].delta.push_back(v.id);
        enqueue_deploy(live_ns, v);
    }
    pump();
    return nss_.at(id);
}

void Engine::delete_ns(NsId id) {
    auto& ns = live(id);
    set_state(id, NsState::TERMINATING, vim_.now());
    std::erase_if(parked_, [&](const ParkedAlarm& p) { return p.ns_id == id; });
    const auto vnfs = ns.vnf_instances;
    for (auto it = vnfs.rbegin(); it != vnfs.rend(); ++it) enqueue_teardown(id, *it);
    pump();
}

std::vector<TaskId> Engine::apply_patch(NetworkService& ns, const NsPatch& patch) {
    const auto& desc = ns.descriptor;
    if (patch.name && *patch.name != desc.name) throw Error(ErrorCode::ImmutableField, "name");
    if (patch.networks && *patch.networks != desc.networks) throw Error(ErrorCode::ImmutableField, "networks");
    if (patch.actuator_bindings && *patch.actuator_bindings != desc.actuator_bindings) {
        throw Error(ErrorCode::ImmutableField, "actuator_bindings");
    }
    for (const auto& vp : patch.vnfs) {
        auto d = std::find_if(desc.vnfs.begin(), desc.vnfs.end(), [&](const auto& v) { return v.name == vp.name; });
        if (d == desc.vnfs.end()) throw Error(ErrorCode::InvalidPatch, "no VNF named '" + vp.name + "'");
        if (vp.image && *vp.image != d->image) throw Error(ErrorCode::ImmutableField, vp.name + ".image");
        if (vp.role && *vp.role != d->role) throw Error(ErrorCode::ImmutableField, vp.name + ".role");
        if (vp.networks && *vp.networks != d->networks) throw Error(ErrorCode::ImmutableField, vp.name + ".networks");
        if (vp.bandwidth_hz && (!d->radio_requirements || *vp.bandwidth_hz != d->radio_requirements->bandwidth_hz)) {
            throw Error(ErrorCode::ImmutableField, vp.name + ".radio_requirements.bandwidth_hz");
        }
        if (vp.flavor && (vp.flavor->vcpus <= 0 || vp.flavor->ram_mb <= 0)) {
            throw Error(ErrorCode::InvalidPatch, vp.name + ".flavor must be positive");
        }
        if (vp.tx_power_dbm && !d->radio_requirements) {
            throw Error(ErrorCode::InvalidPatch, vp.name + " has no radio to set power on");
        }
    }
    for (const auto& [role, count] : patch.role_counts) {
        if (count < 1) throw Error(ErrorCode::InvalidPatch, std::string(to_string(role)) + " count must be >= 1");
        if (std::none_of(desc.vnfs.begin(), desc.vnfs.end(), [&](const auto& v) { return v.role == role; })) {
            throw Error(ErrorCode::InvalidPatch, "no " + std::string(to_string(role)) + " VNF to scale");
        }
    }
    if (!patch.rule_thresholds.empty()) {
        if (!rule_hook_) throw Error(ErrorCode::InvalidPatch, "rule thresholds cannot be patched here");
        for (const auto& [rule, thr] : patch.rule_thresholds) {
            try {
                rule_hook_(rule, thr);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidPatch, e.what());
            }
        }
    }

    const Timestamp now = vim_.now();
    set_state(ns.id, NsState::RECONFIGURING, now);
    auto& rt = runtime_[ns.id];
    rt.delta.clear();
    std::vector<TaskId> tasks;

    for (const auto& vp : patch.vnfs) {
        for (auto vid : ns.vnf_instances) {
            const auto& v = vnfs_.at(vid);
            if (v.descriptor.name != vp.name) continue;
            Params payload{{"vnf", vid.str()}};
            if (vp.flavor && *vp.flavor != v.descriptor.flavor) {
                payload["vcpus"] = std::to_string(vp.flavor->vcpus);
                payload["ram_mb"] = std::to_string(vp.flavor->ram_mb);
            }
            if (vp.tx_power_dbm && *vp.tx_power_dbm != v.descriptor.radio_requirements->tx_power_dbm) {
                payload["tx_power_dbm"] = nlohmann::json(*vp.tx_power_dbm).dump();
            }
            if (payload.size() > 1) tasks.push_back(queue_.enqueue(ns.id, TaskKind::RECONFIGURE_VNF, payload));
        }
    }

    for (const auto& [role, target] : patch.role_counts) {
        std::vector<VnfId> current;
        for (auto vid : ns.vnf_instances) {
            if (vnfs_.at(vid).descriptor.role == role) current.push_back(vid);
        }
        const int have = static_cast<int>(current.size());
        if (target > have) {
            const VnfDescriptor tmpl = vnfs_.at(current.back()).descriptor;
            int enodebs = 0;
            for (auto vid : ns.vnf_instances) enodebs += vnfs_.at(vid).descriptor.role == VnfRole::ENODEB_TX;
            for (int i = have; i < target; ++i) {
                VnfDescriptor d = tmpl;
                std::string name;
                std::uint64_t n = next_vnf_;
                do {
                    name = lower(to_string(role)) + "-" + std::to_string(n++);
                } while (std::any_of(ns.descriptor.vnfs.begin(), ns.descriptor.vnfs.end(),
                                     [&](const auto& x) { return x.name == name; }));
                d.name = name;
                const bool enb = role == VnfRole::ENODEB_TX;
                if (enb) ++enodebs;
                auto& v = add_vnf(ns, d, boot_time_for(enb ? enodebs : 1, enb));
                ns.descriptor.vnfs.push_back(d);
                rt.delta.push_back(v.id);
                auto ids = enqueue_deploy(ns, v);
                tasks.insert(tasks.end(), ids.begin(), ids.end());
            }
        } else if (target < have) {
            // Newest first.
            std::sort(current.begin(), current.end(),
                      [&](VnfId a, VnfId b) { return vnfs_.at(a).ordinal > vnfs_.at(b).ordinal; });
            for (int i = 0; i < have - target; ++i) {
                const auto vid = current[static_cast<std::size_t>(i)];
                const auto name = vnfs_.at(vid).descriptor.name;
                std::erase_if(ns.descriptor.vnfs, [&](const auto& x) { return x.name == name; });
                auto ids = enqueue_teardown(ns.id, vid);
                tasks.insert(tasks.end(), ids.begin(), ids.end());
            }
        }
    }
    return tasks;
}

NetworkService Engine::reconfigure_ns(NsId id, const NsPatch& patch) {
    auto& ns = live(id);
    if (ns.state != NsState::ACTIVE) {
        throw Error(ErrorCode::IllegalTransition,
                    id.str() + " " + std::string(to_string(ns.state)) + " -> RECONFIGURING");
    }
    apply_patch(ns, patch);
    pump();
    return nss_.at(id);
}

void Engine::register_actuator(const Actuator& actuator) {
    if (actuator.name.empty()) throw Error(ErrorCode::DomainError, "actuator name must be non-empty");
    if (actuators_.contains(actuator.name)) throw Error(ErrorCode::DuplicateActuator, actuator.name);
    if (auto it = actuator.parameters.find("role"); it != actuator.parameters.end()) parse_vnf_role(it->second);
    actuators_[actuator.name] = actuator;
    log(vim_.now(), "actuator", actuator.name, "REGISTERED", {{"action", std::string(to_string(actuator.action))}});
}

std::vector<Actuator> Engine::actuators() const {
    std::vector<Actuator> out;
    for (const auto& [name, a] : actuators_) out.push_back(a);
    return out;
}

std::vector<TaskId> Engine::execute_actuator(const std::string& alarm_id, NsId ns_id,
                                             std::optional<AlarmInstanceId> instance) {
    return execute_actuator_impl(alarm_id, ns_id, instance, true);
}

std::vector<TaskId> Engine::execute_actuator_impl(const std::string& alarm_id, NsId ns_id,
                                                  std::optional<AlarmInstanceId> instance, bool may_park) {
    const Timestamp now = vim_.now();
    if (instance && executed_alarms_.contains(*instance)) {
        log(now, "alarm", instance->str(), "DUPLICATE_IGNORED", {{"alarm_id", alarm_id}});
        return {};
    }
    auto& ns = live(ns_id);
    const auto& bindings = ns.descriptor.actuator_bindings;
    auto binding = std::find_if(bindings.begin(), bindings.end(), [&](const auto& b) { return b.alarm_id == alarm_id; });
    if (binding == bindings.end()) throw Error(ErrorCode::UnknownAlarm, alarm_id + " not bound in " + ns_id.str());
    auto act = actuators_.find(binding->actuator);
    if (act == actuators_.end()) throw Error(ErrorCode::UnknownActuator, binding->actuator);
    const Actuator actuator = act->second;

    if (ns.state != NsState::ACTIVE) {
        const bool busy = ns.state == NsState::RECONFIGURING || ns.state == NsState::DEPLOYING;
        if (busy && may_park) {
            parked_.push_back({alarm_id, ns_id, instance});
            log(now, "alarm", alarm_id, "PARKED", {{"ns", ns_id.str()}});
        }
        throw Error(ErrorCode::NSNotActive, ns_id.str() + " is " + std::string(to_string(ns.state)));
    }
    if (instance) executed_alarms_.insert(*instance);
    log(now, "actuator", actuator.name, "EXECUTE",
        {{"ns", ns_id.str()}, {"alarm_id", alarm_id}, {"action", std::string(to_string(actuator.action))}});

    auto param = [&](const char* key, const std::string& fallback) {
        auto it = actuator.parameters.find(key);
        return it == actuator.parameters.end() ? fallback : it->second;
    };
    auto count_role = [&](VnfRole role) {
        int n = 0;
        for (auto vid : ns.vnf_instances) n += vnfs_.at(vid).descriptor.role == role;
        return n;
    };

    std::vector<TaskId> tasks;
    switch (actuator.action) {
        case ActuatorAction::NOOP:
            log(now, "ns", ns_id.str(), "NOOP_ACTUATOR", {{"actuator", actuator.name}});
            break;
        case ActuatorAction::SCALE_OUT: {
            const VnfRole role = parse_vnf_role(param("role", "ENODEB_TX"));
            const int step = std::stoi(param("step", "1"));
            NsPatch patch;
            patch.role_counts[role] = count_role(role) + step;
            tasks = apply_patch(ns, patch);
            break;
        }
        case ActuatorAction::SCALE_IN: {
            const VnfRole role = parse_vnf_role(param("role", "ENODEB_TX"));
            const int step = std::stoi(param("step", "1"));
            const int have = count_role(role);
            if (have <= 1) {
                log(now, "ns", ns_id.str(), "WouldViolateMinimum", {{"role", std::string(to_string(role))}});
                break;
            }
            NsPatch patch;
            patch.role_counts[role] = std::max(1, have - step);
            tasks = apply_patch(ns, patch);
            break;
        }
        case ActuatorAction::PARTIAL_RECONFIGURE: {
            NsPatch patch;
            const std::string role = param("role", "");
            for (auto vid : ns.vnf_instances) {
                const auto& d = vnfs_.at(vid).descriptor;
                if (!role.empty() && d.role != parse_vnf_role(role)) continue;
                VnfPatch vp;
                vp.name = d.name;
                if (actuator.parameters.contains("vcpus") || actuator.parameters.contains("ram_mb")) {
                    vp.flavor = Flavor{std::stoi(param("vcpus", std::to_string(d.flavor.vcpus))),
                                       std::stoi(param("ram_mb", std::to_string(d.flavor.ram_mb)))};
                }
                if (actuator.parameters.contains("tx_power_dbm") && d.radio_requirements) {
                    vp.tx_power_dbm = std::stod(param("tx_power_dbm", "0"));
                }
                if (vp.flavor || vp.tx_power_dbm) patch.vnfs.push_back(vp);
            }
            tasks = apply_patch(ns, patch);
            break;
        }
        case ActuatorAction::REDEPLOY_VWI:
            tasks.push_back(queue_.enqueue(ns_id, TaskKind::RUN_ACTUATOR, {{"actuator", actuator.name}}));
            break;
    }
    pump();
    return tasks;
}

std::vector<TaskId> Engine::handle_alarm(const Alarm& alarm) {
    const auto ns = ns_of_vnf(alarm.vnf_id);
    if (!ns) throw Error(ErrorCode::UnknownAlarm, "no NS owns " + alarm.vnf_id.str());
    return execute_actuator(alarm.alarm_id, *ns, alarm.instance);
}

void Engine::retry_parked(NsId id) {
    std::vector<ParkedAlarm> mine;
    std::erase_if(parked_, [&](const ParkedAlarm& p) {
        if (p.ns_id != id) return false;
        mine.push_back(p);
        return true;
    });
    for (const auto& p : mine) {
        try {
            execute_actuator_impl(p.alarm_id, p.ns_id, p.instance, false);
        } catch (const Error& e) {
            log(vim_.now(), "alarm", p.alarm_id, "PARKED_DROPPED", {{"reason", e.what()}});
        }
    }
}

void Engine::drive_allocate_slice(const Task& t) {
    auto& v = vnfs_.at(vnf_arg(t));
    runtime_[t.ns_id].last_task_at = vim_.now();
    if (v.slice_id) return;
    const auto& rr = *v.descriptor.radio_requirements;
    const auto rrh = vim_.find_free_rrh(rr.bandwidth_hz, rr.tx_power_dbm);
    if (!rrh) throw Error(ErrorCode::CapacityExhausted, "no free RRH for " + v.id.str());
    const auto dev = vim_.rrh(*rrh);
    vim_.attach_rrh(*rrh, v.id);
    try {
        const auto slice = pool_.allocate_slice(rr.bandwidth_hz, dev.location, rr.tx_power_dbm, v.id, dev.max_tx_power_dbm);
        v.slice_id = slice.id;
        v.rrh_id = *rrh;
        live(t.ns_id).slices.push_back(slice.id);
        log(vim_.now(), "vnf", v.id.str(), "SLICE_ALLOCATED",
            {{"slice", slice.id.str()}, {"rrh", rrh->str()}, {"f_low_hz", slice.f_low_hz}, {"f_high_hz", slice.f_high_hz}});
    } catch (...) {
        vim_.detach_rrh(*rrh);
        throw;
    }
}

void Engine::drive_deploy_vnf(const Task& t) {
    auto& v = vnfs_.at(vnf_arg(t));
    runtime_[t.ns_id].last_task_at = vim_.now();
    if (v.vm_id) return;
    const auto& ns = live(t.ns_id);
    const auto vm = vim_.create_vm(v.descriptor.flavor, networks_for(ns, v.descriptor), boot_s_.at(v.id));
    v.vm_id = vm.id;
    vm_to_vnf_[vm.id] = v.id;
    for (const auto& nic : vm.nics) {
        (vim_.network(nic.network).role == NetworkRole::MANAGEMENT ? v.mgmt_ip : v.dataflow_ip) = nic.ip;
    }
    log(vim_.now(), "vnf", v.id.str(), "BOOTING",
        {{"vm", vm.id.str()}, {"host", vm.host_id.str()}, {"boot_deadline", to_seconds(vm.boot_deadline)}});
}

void Engine::drive_delete_vnf(const Task& t) {
    auto& v = vnfs_.at(vnf_arg(t));
    runtime_[t.ns_id].last_task_at = vim_.now();
    if (v.vm_id) {
        if (vim_.has_vm(*v.vm_id)) vim_.delete_vm(*v.vm_id);
        vm_to_vnf_.erase(*v.vm_id);
        v.vm_id.reset();
    }
    if (v.state != VnfState::STOPPED) {
        v.state = VnfState::STOPPED;
        log(vim_.now(), "vnf", v.id.str(), "STOPPED");
    }
    v.mgmt_ip.clear();
    v.dataflow_ip.clear();
    std::erase(live(t.ns_id).vnf_instances, v.id);
}

void Engine::drive_release_slice(const Task& t) {
    auto& v = vnfs_.at(vnf_arg(t));
    runtime_[t.ns_id].last_task_at = vim_.now();
    if (v.slice_id) {
        try {
            pool_.release_slice(*v.slice_id);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UnknownSlice) throw;
        }
        std::erase(live(t.ns_id).slices, *v.slice_id);
        v.slice_id.reset();
    }
    if (v.rrh_id) {
        vim_.detach_rrh(*v.rrh_id);
        v.rrh_id.reset();
    }
}

void Engine::drive_reconfigure_vnf(const Task& t) {
    auto& v = vnfs_.at(vnf_arg(t));
    runtime_[t.ns_id].last_task_at = vim_.now();
    const bool was_running = v.state == VnfState::RUNNING;
    if (was_running) v.state = VnfState::RECONFIGURING;
    try {
        if (t.payload.contains("vcpus")) {
            const Flavor f{std::stoi(t.payload.at("vcpus")), std::stoi(t.payload.at("ram_mb"))};
            if (v.vm_id && vim_.vm(*v.vm_id).flavor != f) vim_.resize_vm(*v.vm_id, f);
            v.descriptor.flavor = f;
        }
        if (t.payload.contains("tx_power_dbm")) {
            const double p = std::stod(t.payload.at("tx_power_dbm"));
            if (v.slice_id) {
                std::optional<double> limit;
                if (v.rrh_id) limit = vim_.rrh(*v.rrh_id).max_tx_power_dbm;
                pool_.set_tx_power(*v.slice_id, p, limit);
            }
            v.descriptor.radio_requirements->tx_power_dbm = p;
        }
    } catch (...) {
        if (was_running) v.state = VnfState::RUNNING;
        throw;
    }
    if (was_running) v.state = VnfState::RUNNING;
    auto& ns = live(t.ns_id);
    for (auto& d : ns.descriptor.vnfs) {
        if (d.name == v.descriptor.name) d = v.descriptor;
    }
    log(vim_.now(), "vnf", v.id.str(), "RECONFIGURED");
}

void Engine::drive_run_actuator(const Task& t) {
    const auto& name = t.payload.at("actuator");
    auto it = actuators_.find(name);
    if (it == actuators_.end()) throw Error(ErrorCode::UnknownActuator, name);
    if (!redeploy_hook_) {
        log(vim_.now(), "actuator", name, "REDEPLOY_UNHANDLED", {{"ns", t.ns_id.str()}});
        return;
    }
    redeploy_hook_(t.ns_id, it->second);
}

void Engine::on_task_failed(const Task& t) {
    log(vim_.now(), "task", t.task_id.str(), "FAILED",
        {{"ns", t.ns_id.str()}, {"kind", std::string(to_string(t.kind))}, {"error", t.last_error}});
    if (t.kind == TaskKind::RUN_ACTUATOR) return;
    auto& rt = runtime_[t.ns_id];
    if (rt.phase == Phase::ROLLING_BACK) return;
    rt.failed = true;
    queue_.cancel(t.ns_id, "cancelled after " + t.task_id.str() + " failed");
}

void Engine::handle_vm_events(const std::vector<VmEvent>& events) {
    for (const auto& e : events) {
        auto vit = vm_to_vnf_.find(e.vm);
        if (vit == vm_to_vnf_.end()) continue;
        auto& v = vnfs_.at(vit->second);
        if (v.state == VnfState::BOOTING) {
            v.state = VnfState::RUNNING;
            log(e.at, "vnf", v.id.str(), "RUNNING", {{"vm", e.vm.str()}});
        }
        reconcile(v.ns_id, e.at);
    }
}

void Engine::reconcile(NsId id, Timestamp at) {
    if (queue_.has_pending(id)) return;
    auto& ns = live(id);
    auto& rt = runtime_[id];
    switch (ns.state) {
        case NsState::DEPLOYING:
        case NsState::RECONFIGURING: {
            if (rt.failed && rt.phase == Phase::NONE) {
                rt.phase = Phase::ROLLING_BACK;
                for (auto it = rt.delta.rbegin(); it != rt.delta.rend(); ++it) {
                    const auto& v = vnfs_.at(*it);
                    if (v.state == VnfState::STOPPED && !v.slice_id && !v.rrh_id) continue;
                    enqueue_teardown(id, *it);
                }
                if (ns.state == NsState::RECONFIGURING) {
                    for (auto vid : rt.delta) {
                        const auto name = vnfs_.at(vid).descriptor.name;
                        std::erase_if(ns.descriptor.vnfs, [&](const auto& d) { return d.name == name; });
                    }
                }
                return;
            }
            if (rt.phase == Phase::ROLLING_BACK) {
                if (ns.state == NsState::DEPLOYING) {
                    for (auto n : ns.networks) vim_.delete_network(n);
                    ns.networks.clear();
                }
                rt = NsRuntime{Phase::NONE, false, rt.last_task_at, {}};
                set_state(id, NsState::FAILED, std::max(at, ns.state_changed_at));
                return;
            }
            Timestamp ready = rt.last_task_at;
            for (auto vid : ns.vnf_instances) {
                const auto& v = vnfs_.at(vid);
                if (v.state != VnfState::RUNNING || !v.vm_id) return;
                ready = std::max(ready, vim_.vm(*v.vm_id).boot_deadline);
            }
            rt.delta.clear();
            set_state(id, NsState::ACTIVE, std::max(ready, ns.state_changed_at));
            retry_parked(id);
            return;
        }
        case NsState::TERMINATING: {
            for (auto n : ns.networks) vim_.delete_network(n);
            ns.networks.clear();
            ns.vnf_instances.clear();
            ns.slices.clear();
            set_state(id, NsState::TERMINATED, std::max(at, ns.state_changed_at));
            return;
        }
        default: return;
    }
}

void Engine::reconcile_all(Timestamp at) {
    std::vector<NsId> ids;
    for (const auto& [id, ns] : nss_) ids.push_back(id);
    for (auto id : ids) reconcile(id, at);
}

void Engine::pump() {
    if (pumping_) return;
    PumpGuard guard(pumping_);
    do {
        queue_.drain();
        reconcile_all(vim_.now());
    } while (queue_.pending() > 0);
}

void Engine::advance_to(Timestamp t) {
    handle_vm_events(vim_.advance_to(t));
    pump();
}

bool Engine::step() {
    const auto next = vim_.next_deadline();
    if (!next) return false;
    advance_to(*next);
    return true;
}

void Engine::poll() {
    handle_vm_events(vim_.poll());
    pump();
}

void Engine::run_until(const std::function<bool()>& done) {
    while (!done()) {
        if (vim_.clock_mode() == ClockMode::VIRTUAL) {
            if (!step()) return;
        } else {
            if (!vim_.next_deadline()) return;
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
            poll();
        }
    }
}

NetworkService Engine::ns(NsId id) const {
    auto it = nss_.find(id);
    if (it == nss_.end()) throw Error(ErrorCode::UnknownNS, id.str());
    return it->second;
}

bool Engine::has_ns(NsId id) const { return nss_.contains(id); }

std::vector<NetworkService> Engine::list() const {
    std::vector<NetworkService> out;
    for (const auto& [id, ns] : nss_) out.push_back(ns);
    return out;
}

VnfInstance Engine::vnf(VnfId id) const {
    auto it = vnfs_.find(id);
    if (it == vnfs_.end()) throw Error(ErrorCode::DomainError, "unknown VNF " + id.str());
    return it->second;
}

std::vector<VnfInstance> Engine::vnfs_of(NsId id) const {
    std::vector<VnfInstance> out;
    for (auto vid : ns(id).vnf_instances) out.push_back(vnfs_.at(vid));
    return out;
}

std::optional<NsId> Engine::ns_of_vnf(VnfId id) const {
    auto it = vnfs_.find(id);
    if (it == vnfs_.end()) return std::nullopt;
    return it->second.ns_id;
}

}  // namespace oocran
