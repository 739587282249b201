#include "oocran/http.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>

#include <httplib.h>

namespace oocran {

namespace {

constexpr auto kTickInterval = std::chrono::milliseconds(20);

struct SplitUrl {
    std::string origin;  // scheme://host:port
    std::string path;
};

SplitUrl split_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

ApiRequest to_api(const httplib::Request& req) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) r.headers[lower(k)] = v;
    return r;
}

std::string sse_frame(const Event& e) {
    nlohmann::json j = e;
    return "id: " + std::to_string(e.seq) + "\nevent: " + e.event + "\ndata: " + j.dump() + "\n\n";
}

}  // namespace

WebhookTransport http_transport() {
    return [](const std::string& url, const std::string& body) {
        const auto u = split_url(url);
        httplib::Client client(u.origin);
        client.set_connection_timeout(2);
        client.set_read_timeout(5);
        auto res = client.Post(u.path, body, "application/json");
        if (!res) throw Error(ErrorCode::DeliveryFailed, "cannot reach " + url + ": " + httplib::to_string(res.error()));
        return TransportResponse{res->status, res->body};
    };
}

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    // httplib's default adds SO_REUSEPORT, which lets a second server share the port silently.
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        const auto api = to_api(req);
        const bool stream = api.path == "/events" && req.method == "GET" && !req.has_param("format");
        if (stream) {
            std::uint64_t from = req.has_param("since") ? std::stoull(req.get_param_value("since")) : 0;
            res.set_header("Cache-Control", "no-cache");
            res.set_chunked_content_provider("text/event-stream", [this, from](std::size_t, httplib::DataSink& sink) mutable {
                if (!running_) return false;
                for (const auto& e : service_.events().wait_since(from, std::chrono::milliseconds(500))) {
                    const auto frame = sse_frame(e);
                    if (!sink.write(frame.data(), frame.size())) return false;
                    from = e.seq + 1;
                }
                return running_.load();
            });
            return;
        }
        const auto out = service_.handle(api);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
    server_->Delete(".*", handler);
    server_->Patch(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start() {
    const auto& cfg = service_.config();
    if (cfg.port == 0) {
        port_ = server_->bind_to_any_port(cfg.host);
        if (port_ < 0) throw Error(ErrorCode::PortInUse, "cannot bind " + cfg.host);
    } else {
        if (!server_->bind_to_port(cfg.host, cfg.port)) {
            throw Error(ErrorCode::PortInUse, "port " + std::to_string(cfg.port) + " is not available");
        }
        port_ = cfg.port;
    }
    running_ = true;
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    ticker_ = std::thread([this] {
        while (running_) {
            // Catch up without sleeping while work is due; idle otherwise.
            bool moved = false;
            try {
                moved = service_.tick();
            } catch (const std::exception&) {
                moved = false;
            }
            if (!moved) std::this_thread::sleep_for(kTickInterval);
        }
    });
    server_->wait_until_ready();
}

void HttpServer::stop() {
    const bool was_running = running_.exchange(false);
    if (was_running) server_->stop();
    if (listener_.joinable()) listener_.join();
    if (ticker_.joinable()) ticker_.join();
}

void HttpServer::wait() {
    if (listener_.joinable()) listener_.join();
    if (ticker_.joinable()) ticker_.join();
}

HttpClient::HttpClient(std::string base_url, std::string token) : base_(std::move(base_url)), token_(std::move(token)) {
    while (!base_.empty() && base_.back() == '/') base_.pop_back();
}

HttpResult HttpClient::request(const std::string& method, const std::string& path, const std::string& body,
                               const std::string& idempotency_key) const {
    httplib::Client client(base_);
    client.set_connection_timeout(3);
    client.set_read_timeout(30);
    httplib::Headers headers;
    if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
    if (!idempotency_key.empty()) headers.emplace("Idempotency-Key", idempotency_key);
    httplib::Result res;
    if (method == "GET") {
        res = client.Get(path, headers);
    } else if (method == "POST") {
        res = client.Post(path, headers, body, "application/json");
    } else if (method == "DELETE") {
        res = client.Delete(path, headers, body, "application/json");
    } else if (method == "PATCH") {
        res = client.Patch(path, headers, body, "application/json");
    } else {
        throw Error(ErrorCode::DomainError, "unsupported method " + method);
    }
    if (!res) throw Error(ErrorCode::DeliveryFailed, "cannot reach " + base_ + ": " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

}  // namespace oocran
