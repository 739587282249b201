#include "oocran/service.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

#include "oocran/http.hpp"
#include "oocran/serialization.hpp"

namespace oocran {

using nlohmann::json;

std::string_view to_string(Scope s) {
    switch (s) {
        case Scope::WIP: return "WIP";
        case Scope::WSP: return "WSP";
        case Scope::WTP: return "WTP";
    }
    return "?";
}

namespace {

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '/')) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

template <class IdT>
IdT path_id(const std::string& text, ErrorCode unknown) {
    try {
        return IdT::parse(text);
    } catch (const Error&) {
        throw Error(unknown, "no such id '" + text + "'");
    }
}

json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    try {
        return json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("body is not JSON: ") + e.what());
    }
}

ApiResponse error_response(const Error& e) {
    return {http_status_for(e.code()), {{"error", std::string(to_string(e.code()))}, {"message", e.what()}}};
}

double query_double(const ApiRequest& r, const std::string& key, double fallback) {
    auto it = r.query.find(key);
    if (it == r.query.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "query parameter '" + key + "' is not a number");
    }
}

VwiDescriptor vwi_from_body(const json& j) {
    const json& src = j.contains("vwi") ? j.at("vwi") : j;
    VwiDescriptor v = src.get<VwiDescriptor>();
    if (src.contains("area_m2")) v.target_area_m2 = src.at("area_m2").get<double>();
    return v;
}

}  // namespace

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownNetwork:
        case ErrorCode::UnknownVm:
        case ErrorCode::UnknownRrh:
        case ErrorCode::UnknownSlice:
        case ErrorCode::UnknownAlarm:
        case ErrorCode::UnknownNS:
        case ErrorCode::UnknownActuator:
            return 404;
        case ErrorCode::ValidationFailed:
        case ErrorCode::InvalidCidr:
        case ErrorCode::DomainError:
        case ErrorCode::InvalidPatch:
        case ErrorCode::ImmutableField:
        case ErrorCode::ParseError:
        case ErrorCode::BadConfig:
            return 400;
        case ErrorCode::QuotaExceeded:
            return 429;
        case ErrorCode::DeliveryFailed:
            return 502;
        default:
            return 409;
    }
}

ServiceConfig service_config_from_env() {
    ServiceConfig c;
    if (auto p = env("OOCRAN_PORT")) {
        char* end = nullptr;
        const long port = std::strtol(p->c_str(), &end, 10);
        if (*end != '\0' || port < 0 || port > 65535) throw Error(ErrorCode::BadConfig, "OOCRAN_PORT must be 0-65535");
        c.port = static_cast<int>(port);
    }
    if (auto s = env("OOCRAN_SECRET")) c.secret = *s;
    if (auto s = env("OOCRAN_SCENARIO")) c.scenario = *s;
    if (auto s = env("OOCRAN_ALERT_URL")) c.alert_url = *s;
    if (auto t = env("OOCRAN_TOKEN_WIP")) c.tokens[Scope::WIP] = *t;
    if (auto t = env("OOCRAN_TOKEN_WSP")) c.tokens[Scope::WSP] = *t;
    if (auto t = env("OOCRAN_TOKEN_WTP")) c.tokens[Scope::WTP] = *t;
    return c;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
    if (config_.secret.empty()) throw Error(ErrorCode::BadConfig, "webhook secret must not be empty");
    Scenario scenario = default_scenario();
    if (config_.scenario) {
        if (!std::filesystem::exists(*config_.scenario)) {
            throw Error(ErrorCode::BadConfig, "scenario file not found: " + config_.scenario->string());
        }
        scenario = load_scenario(*config_.scenario);
    }
    system_ = std::make_unique<System>(scenario, config_.secret);
}

std::optional<ApiResponse> Service::authorize(const ApiRequest& r) const {
    if (config_.tokens.empty()) return std::nullopt;
    // The alarm callback authenticates by HMAC signature instead.
    if (r.path == "/alerts/messages") return std::nullopt;
    auto it = r.headers.find("authorization");
    std::optional<Scope> scope;
    if (it != r.headers.end() && it->second.rfind("Bearer ", 0) == 0) {
        const auto token = it->second.substr(7);
        for (const auto& [s, t] : config_.tokens) {
            if (t == token) scope = s;
        }
    }
    if (!scope) return ApiResponse{401, {{"error", "Unauthorized"}, {"message", "missing or unknown bearer token"}}};
    if (r.method == "GET") return std::nullopt;

    const auto parts = split_path(r.path);
    const std::string root = parts.empty() ? "" : parts[0];
    bool allowed = false;
    if (root == "metrics") {
        allowed = *scope == Scope::WIP || *scope == Scope::WSP;
    } else if (root == "actuators") {
        allowed = *scope == Scope::WSP;
    } else if (root == "vwis" && parts.size() == 2 && parts[1] == "plan") {
        allowed = true;
    } else if (root == "nss" || root == "vwis") {
        allowed = *scope == Scope::WSP || *scope == Scope::WTP;
    }
    if (!allowed) {
        return ApiResponse{403, {{"error", "Forbidden"}, {"message", std::string(to_string(*scope)) + " may not " + r.method + " " + r.path}}};
    }
    return std::nullopt;
}

ApiResponse Service::handle(const ApiRequest& request) {
    if (auto denied = authorize(request)) return *denied;
    std::lock_guard lock(mu_);
    std::string key;
    if (request.method != "GET") {
        if (auto it = request.headers.find("idempotency-key"); it != request.headers.end()) key = it->second;
    }
    if (!key.empty()) {
        if (auto it = idempotency_.find(key); it != idempotency_.end()) {
            if (it->second.method != request.method || it->second.path != request.path) {
                return {422, {{"error", "IdempotencyKeyReused"}, {"message", "key already used for another request"}}};
            }
            return it->second.response;
        }
    }
    ApiResponse response;
    try {
        response = route(request);
    } catch (const Error& e) {
        response = error_response(e);
    } catch (const json::exception& e) {
        response = {400, {{"error", "ParseError"}, {"message", e.what()}}};
    }
    if (!key.empty()) idempotency_[key] = {request.method, request.path, response};
    return response;
}

json Service::ns_view(NsId id) {
    auto& engine = system_->engine();
    json j = engine.ns(id);
    j["vnfs"] = engine.vnfs_of(id);
    return j;
}

ApiResponse Service::route(const ApiRequest& r) {
    const auto parts = split_path(r.path);
    auto& engine = system_->engine();
    const auto& m = r.method;
    const auto n = parts.size();
    const std::string root = n > 0 ? parts[0] : "";

    if (root == "nss") {
        if (n == 1 && m == "GET") {
            json out = json::array();
            for (const auto& ns : engine.list()) out.push_back(ns_view(ns.id));
            return {200, out};
        }
        if (n == 1 && m == "POST") {
            const json body = parse_body(r.body);
            const auto desc = (body.contains("descriptor") ? body.at("descriptor") : body).get<NsDescriptor>();
            const auto ns = engine.create_ns(desc);
            system_->after_progress();
            return {202, {{"id", ns.id.str()}, {"state", std::string(to_string(engine.ns(ns.id).state))}}};
        }
        if (n == 2) {
            const auto id = path_id<NsId>(parts[1], ErrorCode::UnknownNS);
            if (m == "GET") return {200, ns_view(id)};
            if (m == "DELETE") {
                engine.delete_ns(id);
                system_->after_progress();
                return {202, {{"id", id.str()}, {"state", std::string(to_string(engine.ns(id).state))}}};
            }
            if (m == "PATCH") {
                const auto ns = engine.reconfigure_ns(id, parse_patch(parse_body(r.body)));
                system_->after_progress();
                return {202, {{"id", id.str()}, {"state", std::string(to_string(engine.ns(id).state))}}};
            }
        }
    } else if (root == "actuators" && n == 1) {
        if (m == "GET") return {200, engine.actuators()};
        if (m == "POST") {
            const auto a = parse_body(r.body).get<Actuator>();
            engine.register_actuator(a);
            return {201, a};
        }
    } else if (root == "metrics") {
        if (n == 1 && m == "POST") {
            const json body = parse_body(r.body);
            MetricSample s;
            s.vnf_id = path_id<VnfId>(body.at("vnf_id").get<std::string>(), ErrorCode::DomainError);
            if (!engine.ns_of_vnf(s.vnf_id)) throw Error(ErrorCode::DomainError, "unknown vnf " + s.vnf_id.str());
            s.metric = body.at("metric").get<std::string>();
            s.value = body.at("value").get<double>();
            s.ts = body.contains("ts") ? seconds_to_duration(body.at("ts").get<double>()) : system_->vim().now();
            const auto fired = system_->monitor().ingest(s);
            return {202, {{"alarms", fired}}};
        }
        if (n == 2 && parts[1] == "query" && m == "GET") {
            auto it = r.query.find("vnf_id");
            auto mt = r.query.find("metric");
            if (it == r.query.end() || mt == r.query.end()) {
                throw Error(ErrorCode::DomainError, "vnf_id and metric are required");
            }
            const auto vnf = path_id<VnfId>(it->second, ErrorCode::DomainError);
            const auto start = seconds_to_duration(query_double(r, "start", 0.0));
            const auto end = seconds_to_duration(query_double(r, "end", to_seconds(system_->vim().now())));
            json out = json::array();
            for (const auto& s : system_->monitor().query(vnf, mt->second, start, end)) {
                out.push_back({{"vnf_id", s.vnf_id.str()}, {"metric", s.metric}, {"value", s.value}, {"ts", to_seconds(s.ts)}});
            }
            return {200, out};
        }
    } else if (root == "alerts" && n == 2 && parts[1] == "messages" && m == "POST") {
        const auto result = system_->receiver().receive(r.body);
        json tasks = json::array();
        for (auto t : result.tasks) tasks.push_back(t.str());
        system_->after_progress();
        return {result.http_status, {{"status", result.status == ReceiveStatus::ACCEPTED ? "ACCEPTED" : "REJECTED"},
                                     {"reason", result.reason},
                                     {"tasks", tasks}}};
    } else if (root == "vwis") {
        if (n == 2 && parts[1] == "plan" && m == "POST") {
            return {200, system_->planner().plan(vwi_from_body(parse_body(r.body)))};
        }
        if (n == 1 && m == "POST") {
            const auto vwi = vwi_from_body(parse_body(r.body));
            const auto plan = system_->planner().plan(vwi);
            const auto ns = engine.create_ns(system_->planner().to_ns(vwi));
            system_->after_progress();
            return {202, {{"id", ns.id.str()}, {"state", std::string(to_string(engine.ns(ns.id).state))}, {"plan", plan}}};
        }
        if (n == 3 && parts[2] == "swap" && m == "POST") {
            const auto old = path_id<NsId>(parts[1], ErrorCode::UnknownNS);
            const json body = parse_body(r.body);
            const auto strategy = parse_swap_strategy(body.value("strategy", std::string("SOFT_HANDOVER")));
            const auto op = system_->start_swap(old, vwi_from_body(body), strategy);
            json out{{"old_ns", old.str()}, {"strategy", std::string(to_string(strategy))}};
            out["new_ns"] = op.new_ns() ? json(op.new_ns()->str()) : json(nullptr);
            return {202, out};
        }
        if (n == 2 && parts[1] == "swaps" && m == "GET") return {200, system_->swap_reports()};
    } else if (root == "infrastructure" && n == 1 && m == "GET") {
        return {200, system_->infrastructure()};
    } else if (root == "events" && n == 1 && m == "GET") {
        const auto since = static_cast<std::uint64_t>(query_double(r, "since", 0.0));
        return {200, system_->events().since(since)};
    } else if (root == "tasks" && n == 1 && m == "GET") {
        return {200, {{"log", engine.queue().export_log()}, {"pending", engine.queue().pending()}}};
    }
    return {404, {{"error", "NotFound"}, {"message", m + " " + r.path}}};
}

WebhookTransport Service::transport() {
    if (!config_.alert_url.empty()) return {};
    return [this](const std::string&, const std::string& body) {
        const auto resp = handle({"POST", "/alerts/messages", {}, {}, body});
        return TransportResponse{resp.status, resp.body.dump()};
    };
}

bool Service::tick() {
    std::vector<Alarm> outbox;
    bool moved = false;
    {
        std::lock_guard lock(mu_);
        const auto before = system_->events().size();
        if (system_->vim().clock_mode() == ClockMode::VIRTUAL) {
            moved = system_->step();
        } else {
            system_->poll();
        }
        system_->engine().pump();
        system_->after_progress();
        moved = moved || system_->events().size() != before;
        outbox = system_->monitor().take_outbox();
    }
    if (outbox.empty()) return moved;
    const WebhookEndpoint endpoint{config_.alert_url.empty() ? "loopback:/alerts/messages" : config_.alert_url,
                                   config_.secret};
    auto send = transport();
    if (!send) send = http_transport();
    const bool realtime = system_->vim().clock_mode() == ClockMode::REALTIME;
    for (const auto& alarm : outbox) {
        try {
            const auto receipt = system_->monitor().deliver(alarm, endpoint, send, realtime);
            std::lock_guard lock(mu_);
            system_->events().append(system_->vim().now(), "alarm", alarm.instance.str(),
                                     receipt.status == DeliveryStatus::ACCEPTED ? "DELIVERED" : "REJECTED",
                                     {{"alarm_id", alarm.alarm_id}, {"http_status", receipt.http_status}});
        } catch (const Error& e) {
            std::lock_guard lock(mu_);
            system_->events().append(system_->vim().now(), "alarm", alarm.instance.str(), "DEAD_LETTER",
                                     {{"reason", e.what()}});
        }
    }
    return true;
}

void Service::settle(int max_ticks) {
    for (int i = 0; i < max_ticks; ++i) {
        const bool moved = tick();
        std::lock_guard lock(mu_);
        const bool busy = system_->vim().next_deadline().has_value() || system_->engine().queue().pending() > 0 ||
                          system_->swaps_pending();
        if (!moved && !busy) return;
        if (!moved) {
            if (system_->vim().clock_mode() == ClockMode::VIRTUAL) return;
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }
}

}  // namespace oocran
