#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "oocran/monitor.hpp"
#include "oocran/service.hpp"

namespace httplib {
class Server;
}

namespace oocran {

/// Posts the webhook body with an HTTP client.
WebhookTransport http_transport();

/// HTTP front for a Service plus the background loop that boots VMs and
/// delivers alarms.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds and starts serving in background threads. Port 0 picks a free
    /// port. Throws PortInUse.
    void start();
    void stop();
    /// Blocks until stop() is called from another thread.
    void wait();
    int port() const { return port_; }

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
    std::thread listener_;
    std::thread ticker_;
    std::atomic<bool> running_{false};
    int port_ = 0;
};

struct HttpResult {
    int status = 0;
    std::string body;
};

/// Minimal client used by the CLI. Throws DeliveryFailed when unreachable.
class HttpClient {
public:
    HttpClient(std::string base_url, std::string token = {});
    HttpResult request(const std::string& method, const std::string& path, const std::string& body = {},
                       const std::string& idempotency_key = {}) const;

private:
    std::string base_;
    std::string token_;
};

}  // namespace oocran
