#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "oocran/system.hpp"

namespace oocran {

/// Operator roles; each has one shared bearer token.
enum class Scope { WIP, WSP, WTP };
std::string_view to_string(Scope s);

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8000;
    std::string secret = "oocran-secret";
    std::optional<std::filesystem::path> scenario;
    /// Empty map disables bearer checks.
    std::map<Scope, std::string> tokens;
    /// Where alarm callbacks are posted. Empty: handed to this service in-process.
    std::string alert_url;
};

/// OOCRAN_PORT, OOCRAN_SECRET, OOCRAN_SCENARIO, OOCRAN_TOKEN_{WIP,WSP,WTP},
/// OOCRAN_ALERT_URL. Throws BadConfig for a malformed port.
ServiceConfig service_config_from_env();

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;  // lowercase names
    std::string body;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

int http_status_for(ErrorCode code);

/// The REST surface without the transport. Every handler runs under one lock,
/// so responses always reflect committed NS states.
class Service {
public:
    explicit Service(ServiceConfig config);

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    ApiResponse handle(const ApiRequest& request);

    /// One background iteration: boots due VMs (a single deadline step in
    /// VIRTUAL mode), then delivers pending alarms without holding the lock.
    /// Returns true when anything happened.
    bool tick();
    /// Ticks until no VM is booting, no task is queued and no alarm waits.
    void settle(int max_ticks = 100000);

    EventLog& events() { return system_->events(); }
    const ServiceConfig& config() const { return config_; }
    /// Callers that touch the system directly must hold this.
    std::mutex& mutex() { return mu_; }
    System& system() { return *system_; }

private:
    ApiResponse route(const ApiRequest& request);
    std::optional<ApiResponse> authorize(const ApiRequest& request) const;
    WebhookTransport transport();
    nlohmann::json ns_view(NsId id);

    ServiceConfig config_;
    std::unique_ptr<System> system_;
    std::mutex mu_;
    struct Cached {
        std::string method;
        std::string path;
        ApiResponse response;
    };
    std::map<std::string, Cached> idempotency_;
};

}  // namespace oocran
