#include "oocran/system.hpp"

#include <algorithm>
#include <cmath>

#include "oocran/serialization.hpp"

namespace oocran {

namespace {

template <class T>
T value_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

TimeModel parse_time_model(const json& j) {
    TimeModel tm = TimeModel::measured_table();
    if (j.contains("table")) {
        tm.table.clear();
        for (const auto& a : j.at("table")) {
            if (a.is_array()) {
                tm.table.push_back({a.at(0).get<int>(), a.at(1).get<double>()});
            } else {
                tm.table.push_back({a.at("enodebs").get<int>(), a.at("seconds").get<double>()});
            }
        }
    }
    const auto mode = value_or<std::string>(j, "mode", "TABLE");
    if (mode == "LINEAR") {
        const auto fit = fit_least_squares(tm.table);
        tm.mode = TimeModelMode::LINEAR;
        tm.a_s = value_or(j, "a_s", fit.intercept);
        tm.b_s_per_enodeb = value_or(j, "b_s_per_enodeb", fit.slope);
    } else if (mode != "TABLE") {
        throw Error(ErrorCode::BadConfig, "time_model.mode must be TABLE or LINEAR");
    }
    tm.validate();
    return tm;
}

AlertRule parse_rule(const json& j) {
    AlertRule r;
    r.rule_id = j.at("rule_id").get<std::string>();
    r.metric = j.at("metric").get<std::string>();
    r.predicate = parse_predicate(j.at("predicate").get<std::string>());
    r.threshold = j.at("threshold").get<double>();
    r.consecutive = value_or(j, "consecutive", 1);
    r.alarm_id = j.at("alarm_id").get<std::string>();
    return r;
}

}  // namespace

Scenario default_scenario() {
    Scenario s;
    s.hosts = {{0, 24, 65536}, {1, 24, 65536}};
    // Five RRHs spread along a line, 60 m apart.
    for (int i = 0; i < 5; ++i) s.rrhs.push_back({i, {60.0 * i, 0.0}, 20e6, 20.0});
    return s;
}

Scenario parse_scenario(const json& j) {
    Scenario s = default_scenario();
    try {
        if (j.is_null()) return s;
        if (!j.is_object()) throw Error(ErrorCode::BadConfig, "scenario must be a mapping");
        s.clock = parse_clock_mode(value_or<std::string>(j, "clock", "VIRTUAL"));
        if (j.contains("hosts")) {
            s.hosts.clear();
            int next = 0;
            for (const auto& h : j.at("hosts")) {
                s.hosts.push_back({value_or(h, "id", next), h.at("vcpus").get<int>(), value_or(h, "ram_mb", 65536)});
                next = s.hosts.back().id + 1;
            }
            std::stable_sort(s.hosts.begin(), s.hosts.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        }
        if (j.contains("rrhs") || j.contains("rrh_grid")) s.rrhs.clear();
        if (j.contains("rrhs")) {
            int next = 0;
            for (const auto& r : j.at("rrhs")) {
                s.rrhs.push_back({value_or(r, "id", next),
                                  {value_or(r, "x", 0.0), value_or(r, "y", 0.0)},
                                  value_or(r, "max_bandwidth_hz", 20e6),
                                  value_or(r, "max_tx_power_dbm", 20.0)});
                next = s.rrhs.back().id + 1;
            }
        }
        if (j.contains("rrh_grid")) {
            const auto& g = j.at("rrh_grid");
            const int count = g.at("count").get<int>();
            const double spacing = value_or(g, "spacing_m", 60.0);
            const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
            const int base = s.rrhs.empty() ? 0 : s.rrhs.back().id + 1;
            for (int i = 0; i < count; ++i) {
                s.rrhs.push_back({base + i,
                                  {spacing * (i % cols), spacing * (i / cols)},
                                  value_or(g, "max_bandwidth_hz", 20e6),
                                  value_or(g, "max_tx_power_dbm", 20.0)});
            }
        }
        std::stable_sort(s.rrhs.begin(), s.rrhs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        if (j.contains("pool")) {
            const auto& p = j.at("pool");
            s.pool.f_start_hz = value_or(p, "f_start_hz", s.pool.f_start_hz);
            s.pool.f_end_hz = value_or(p, "f_end_hz", s.pool.f_end_hz);
            s.pool.reuse_distance_m = value_or(p, "reuse_distance_m", s.pool.reuse_distance_m);
            s.pool.snr_threshold_db = value_or(p, "snr_threshold_db", s.pool.snr_threshold_db);
        }
        if (j.contains("time_model")) {
            s.engine.time_model = parse_time_model(j.at("time_model"));
            s.planner.time_model = s.engine.time_model;
        }
        if (j.contains("quotas")) {
            s.engine.max_live_ns = value_or<std::size_t>(j.at("quotas"), "max_live_ns", 0);
            s.engine.max_vcpus = value_or(j.at("quotas"), "max_vcpus", 0);
        }
        if (j.contains("tasks")) s.engine.queue.max_retries = value_or(j.at("tasks"), "max_retries", 3);
        if (j.contains("monitor")) {
            const auto& m = j.at("monitor");
            s.monitor.retention = value_or<std::size_t>(m, "retention", s.monitor.retention);
            s.monitor.delivery_retries = value_or(m, "delivery_retries", s.monitor.delivery_retries);
            s.monitor.delivery_backoff = std::chrono::milliseconds(value_or(m, "delivery_backoff_ms", 200));
            if (m.contains("persistence_path")) s.monitor.persistence_path = m.at("persistence_path").get<std::string>();
        }
        if (j.contains("swap")) s.planner.min_swap_interval_s = value_or(j.at("swap"), "min_interval_s", 0.0);
        if (j.contains("vwi_template")) {
            const auto& t = j.at("vwi_template");
            auto& tmpl = s.planner.vwi_template;
            if (t.contains("enodeb_flavor")) tmpl.enodeb_flavor = t.at("enodeb_flavor").get<Flavor>();
            tmpl.image = value_or(t, "image", tmpl.image);
            tmpl.tx_power_dbm = value_or(t, "tx_power_dbm", tmpl.tx_power_dbm);
            tmpl.mgmt_cidr = value_or(t, "mgmt_cidr", tmpl.mgmt_cidr);
            tmpl.dataflow_cidr = value_or(t, "dataflow_cidr", tmpl.dataflow_cidr);
            if (t.contains("actuator_bindings")) {
                tmpl.actuator_bindings = t.at("actuator_bindings").get<std::vector<ActuatorBinding>>();
            }
        }
        if (j.contains("actuators")) s.actuators = j.at("actuators").get<std::vector<Actuator>>();
        if (j.contains("rules")) {
            for (const auto& r : j.at("rules")) s.rules.push_back(parse_rule(r));
        }
        if (j.contains("repository")) s.repository = j.at("repository").get<std::vector<VwiDescriptor>>();
        if (j.contains("workload")) s.workload = j.at("workload");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::BadConfig, e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw Error(ErrorCode::BadConfig, e.what());
        throw;
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    Scenario s = parse_scenario(load_structured_file(path));
    s.base_dir = path.parent_path();
    return s;
}

System::System(const Scenario& scenario, std::string webhook_secret)
    : scenario_(scenario),
      secret_(std::move(webhook_secret)),
      vim_(scenario.clock),
      pool_(scenario.pool),
      monitor_(scenario.monitor),
      planner_(scenario.planner),
      receiver_(secret_, [this](const Alarm& a) {
          events_.append(vim_.now(), "alarm", a.instance.str(), "RECEIVED", {{"alarm_id", a.alarm_id}});
          return engine_->handle_alarm(a);
      }) {
    for (const auto& h : scenario.hosts) vim_.add_host(h.vcpus, h.ram_mb);
    for (const auto& r : scenario.rrhs) vim_.add_rrh(r.location, r.max_bandwidth_hz, r.max_tx_power_dbm);
    engine_ = std::make_unique<Engine>(vim_, pool_, events_, scenario.engine);
    engine_->set_rule_threshold_hook([this](const std::string& rule, double thr) { monitor_.set_threshold(rule, thr); });
    engine_->set_redeploy_hook([this](NsId ns, const Actuator& a) { redeploys_.emplace_back(ns, a); });
    for (const auto& a : scenario.actuators) engine_->register_actuator(a);
    for (const auto& r : scenario.rules) monitor_.add_rule(r);
    for (const auto& v : scenario.repository) planner_.repository().put(v);
}

SwapOperation System::start_swap(NsId old_ns, const VwiDescriptor& target, SwapStrategy strategy) {
    swaps_.push_back(planner_.begin_swap(*engine_, old_ns, target, strategy));
    const SwapOperation started = swaps_.back();
    events_.append(vim_.now(), "swap", old_ns.str(), "STARTED",
                   {{"strategy", std::string(to_string(strategy))},
                    {"new_ns", started.new_ns() ? started.new_ns()->str() : ""}});
    // May finish and drop the swap right away when the new NS failed.
    after_progress();
    return started;
}

bool System::swaps_pending() const {
    return std::any_of(swaps_.begin(), swaps_.end(), [](const SwapOperation& s) { return !s.finished(); }) ||
           !redeploys_.empty();
}

void System::after_progress() {
    auto requests = std::exchange(redeploys_, {});
    for (const auto& [ns, act] : requests) {
        const auto& p = act.parameters;
        VwiDescriptor target;
        target.name = p.contains("name") ? p.at("name") : engine_->ns(ns).descriptor.name;
        target.cell_radius_m = p.contains("cell_radius_m") ? std::stod(p.at("cell_radius_m")) : 30.0;
        if (p.contains("n_enodebs")) {
            target.target_area_m2 = std::stod(p.at("n_enodebs")) * coverage_area_m2(target.cell_radius_m);
        } else if (p.contains("area_m2")) {
            target.target_area_m2 = std::stod(p.at("area_m2"));
        } else {
            target.target_area_m2 = coverage_area_m2(target.cell_radius_m);
        }
        for (const auto& [k, v] : p) {
            if (k.rfind("profile.", 0) == 0) target.traffic_profile[k.substr(8)] = std::stod(v);
        }
        const auto strategy = parse_swap_strategy(p.contains("strategy") ? p.at("strategy") : "SOFT_HANDOVER");
        try {
            start_swap(ns, target, strategy);
        } catch (const Error& e) {
            events_.append(vim_.now(), "swap", ns.str(), "REJECTED", {{"reason", e.what()}});
        }
    }
    for (auto& op : swaps_) {
        if (op.finished()) continue;
        if (!op.advance()) continue;
        try {
            auto r = op.report();
            planner_.note_swap(r, vim_.now());
            events_.append(vim_.now(), "swap", r.old_ns.str(), "COMPLETED", r);
            reports_.push_back(r);
        } catch (const Error& e) {
            events_.append(vim_.now(), "swap", op.old_ns().str(), "FAILED", {{"reason", e.what()}});
        }
    }
    std::erase_if(swaps_, [](const SwapOperation& s) { return s.finished(); });
}

bool System::step() {
    const bool moved = engine_->step();
    after_progress();
    return moved;
}

void System::advance_to(Timestamp t) {
    while (auto next = vim_.next_deadline()) {
        if (*next > t) break;
        engine_->advance_to(*next);
        after_progress();
    }
    if (vim_.now() < t) engine_->advance_to(t);
    after_progress();
}

void System::poll() {
    engine_->poll();
    after_progress();
}

WebhookTransport System::loopback_transport() {
    return [this](const std::string&, const std::string& body) {
        const auto r = receiver_.receive(body);
        return TransportResponse{r.http_status, r.reason};
    };
}

std::vector<DeliveryReceipt> System::deliver_alarms(const WebhookEndpoint& endpoint, const WebhookTransport& transport) {
    std::vector<DeliveryReceipt> out;
    for (const auto& alarm : monitor_.take_outbox()) {
        try {
            out.push_back(monitor_.deliver(alarm, endpoint, transport, vim_.clock_mode() == ClockMode::REALTIME));
            events_.append(vim_.now(), "alarm", alarm.instance.str(),
                           out.back().status == DeliveryStatus::ACCEPTED ? "DELIVERED" : "REJECTED",
                           {{"alarm_id", alarm.alarm_id}, {"http_status", out.back().http_status}});
        } catch (const Error& e) {
            events_.append(vim_.now(), "alarm", alarm.instance.str(), "DEAD_LETTER", {{"reason", e.what()}});
        }
    }
    after_progress();
    return out;
}

nlohmann::json System::infrastructure() const {
    json j;
    j["clock"] = {{"mode", std::string(to_string(vim_.clock_mode()))}, {"now", to_seconds(vim_.now())}};
    j["hosts"] = json::array();
    for (const auto& h : vim_.hosts()) {
        j["hosts"].push_back({{"id", h.id.str()},
                              {"vcpus_total", h.vcpus_total},
                              {"vcpus_free", h.vcpus_free},
                              {"ram_mb_total", h.ram_mb_total},
                              {"ram_mb_free", h.ram_mb_free}});
    }
    j["vms"] = json::array();
    for (const auto& vm : vim_.vms()) {
        json nics = json::array();
        for (const auto& n : vm.nics) nics.push_back({{"network", n.network.str()}, {"ip", n.ip}});
        j["vms"].push_back({{"id", vm.id.str()},
                            {"host_id", vm.host_id.str()},
                            {"flavor", vm.flavor},
                            {"state", std::string(to_string(vm.state))},
                            {"boot_deadline", to_seconds(vm.boot_deadline)},
                            {"nics", nics}});
    }
    j["networks"] = json::array();
    for (const auto& n : vim_.networks()) {
        const auto cursor = n.next_ip_cursor();
        j["networks"].push_back({{"id", n.id.str()},
                                 {"role", std::string(to_string(n.role))},
                                 {"cidr", n.prefix.str()},
                                 {"gateway", format_ipv4(n.gateway())},
                                 {"next_ip_cursor", cursor ? format_ipv4(*cursor) : ""},
                                 {"assigned", n.assigned.size()}});
    }
    j["rrhs"] = json::array();
    for (const auto& r : vim_.rrhs()) {
        j["rrhs"].push_back({{"id", r.id.str()},
                             {"x", r.location.x},
                             {"y", r.location.y},
                             {"max_bandwidth_hz", r.max_bandwidth_hz},
                             {"max_tx_power_dbm", r.max_tx_power_dbm},
                             {"attached_vnf", r.attached_vnf ? json(r.attached_vnf->str()) : json(nullptr)}});
    }
    const auto& cfg = pool_.config();
    j["pool"] = {{"f_start_hz", cfg.f_start_hz},
                 {"f_end_hz", cfg.f_end_hz},
                 {"reuse_distance_m", cfg.reuse_distance_m},
                 {"snr_threshold_db", cfg.snr_threshold_db},
                 {"slices", json::array()}};
    for (const auto& s : pool_.slices()) {
        j["pool"]["slices"].push_back({{"id", s.id.str()},
                                       {"f_low_hz", s.f_low_hz},
                                       {"f_high_hz", s.f_high_hz},
                                       {"tx_power_dbm", s.tx_power_dbm},
                                       {"x", s.location.x},
                                       {"y", s.location.y},
                                       {"owner_vnf", s.owner_vnf.str()}});
    }
    return j;
}

nlohmann::json System::resource_snapshot() const {
    return {{"vim", vim_.resource_snapshot()}, {"pool", pool_.resource_snapshot()}};
}

namespace {

struct WorkItem {
    Timestamp at;
    std::size_t order;
    json entry;
};

VwiDescriptor vwi_from(const json& item, double default_radius = 30.0) {
    VwiDescriptor v;
    if (item.contains("vwi")) v = item.at("vwi").get<VwiDescriptor>();
    if (v.cell_radius_m <= 0.0) v.cell_radius_m = default_radius;
    if (item.contains("n_enodebs")) {
        v.target_area_m2 = item.at("n_enodebs").get<double>() * coverage_area_m2(v.cell_radius_m);
    }
    if (item.contains("area_m2")) v.target_area_m2 = item.at("area_m2").get<double>();
    if (item.contains("name")) v.name = item.at("name").get<std::string>();
    if (v.name.empty() || v.name == "vwi") v.name = item.value("as", std::string("vwi"));
    return v;
}

}  // namespace

SimulationResult run_simulation(System& system, Timestamp until) {
    if (system.vim().clock_mode() != ClockMode::VIRTUAL) {
        throw Error(ErrorCode::WrongClockMode, "simulate runs in VIRTUAL time only");
    }
    SimulationResult result;
    std::vector<WorkItem> items;
    std::size_t order = 0;
    for (const auto& entry : system.scenario().workload) {
        items.push_back({seconds_to_duration(entry.value("at", 0.0)), order++, entry});
    }
    std::stable_sort(items.begin(), items.end(), [](const WorkItem& a, const WorkItem& b) { return a.at < b.at; });

    auto label = [&](const json& entry) -> NsId {
        const auto name = entry.at("ns").get<std::string>();
        auto it = result.labels.find(name);
        if (it == result.labels.end()) throw Error(ErrorCode::UnknownNS, "no NS labelled '" + name + "'");
        return it->second;
    };
    auto& engine = system.engine();
    const WebhookEndpoint loopback{"loopback:/alerts/messages", system.webhook_secret()};

    auto run_item = [&](const json& entry) {
        const auto action = entry.at("action").get<std::string>();
        const auto as = entry.value("as", std::string());
        if (action == "deploy") {
            NsDescriptor d;
            if (entry.at("descriptor").is_string()) {
                d = load_descriptor(system.scenario().base_dir / entry.at("descriptor").get<std::string>());
            } else {
                d = entry.at("descriptor").get<NsDescriptor>();
            }
            const auto ns = engine.create_ns(d);
            if (!as.empty()) result.labels[as] = ns.id;
        } else if (action == "deploy_vwi") {
            const auto desc = system.planner().to_ns(vwi_from(entry));
            const auto ns = engine.create_ns(desc);
            if (!as.empty()) result.labels[as] = ns.id;
        } else if (action == "delete") {
            engine.delete_ns(label(entry));
        } else if (action == "reconfigure") {
            engine.reconfigure_ns(label(entry), parse_patch(entry.at("patch")));
        } else if (action == "swap") {
            const auto strategy = parse_swap_strategy(entry.value("strategy", std::string("HARD")));
            const auto op = system.start_swap(label(entry), vwi_from(entry), strategy);
            if (!as.empty() && op.new_ns()) result.labels[as] = *op.new_ns();
        } else if (action == "metric") {
            const NsId ns = label(entry);
            const auto vnf_name = entry.at("vnf").get<std::string>();
            std::optional<VnfId> vnf;
            for (const auto& v : engine.vnfs_of(ns)) {
                if (v.descriptor.name == vnf_name) vnf = v.id;
            }
            if (!vnf) throw Error(ErrorCode::DomainError, "no VNF '" + vnf_name + "' in " + ns.str());
            system.monitor().ingest({*vnf, entry.at("metric").get<std::string>(), entry.at("value").get<double>(),
                                     system.vim().now()});
            system.deliver_alarms(loopback, system.loopback_transport());
        } else {
            throw Error(ErrorCode::BadConfig, "unknown workload action '" + action + "'");
        }
    };

    std::size_t next = 0;
    for (;;) {
        const auto boot = system.vim().next_deadline();
        const std::optional<Timestamp> work = next < items.size() ? std::optional(items[next].at) : std::nullopt;
        if (!boot && !work) break;
        const Timestamp t = std::min(boot.value_or(Timestamp::max()), work.value_or(Timestamp::max()));
        if (t > until) break;
        system.advance_to(t);
        while (next < items.size() && items[next].at <= system.vim().now()) {
            const auto& entry = items[next++].entry;
            try {
                run_item(entry);
            } catch (const Error& e) {
                system.events().append(system.vim().now(), "workload", entry.value("action", std::string("?")),
                                       "ERROR", {{"reason", e.what()}, {"at", entry.value("at", 0.0)}});
            }
            system.after_progress();
        }
    }
    if (until != Timestamp::max() && system.vim().now() < until) system.advance_to(until);
    result.events = system.events().all();
    result.swaps = system.swap_reports();
    result.ended_at = system.vim().now();
    return result;
}

}  // namespace oocran
