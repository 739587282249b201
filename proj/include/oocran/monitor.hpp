#pragma once

#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oocran/model.hpp"

namespace oocran {

struct MetricSample {
    VnfId vnf_id;
    std::string metric;
    double value = 0.0;
    Timestamp ts{0};
};

enum class Predicate { GT, LT, GTE, LTE };
std::string_view to_string(Predicate p);
Predicate parse_predicate(std::string_view s);
bool holds(Predicate p, double value, double threshold);

struct AlertRule {
    std::string rule_id;
    std::string metric;
    Predicate predicate = Predicate::GT;
    double threshold = 0.0;
    int consecutive = 1;
    std::string alarm_id;
};

struct WebhookEndpoint {
    std::string url;
    std::string secret;
};

/// Lowercase hex HMAC-SHA256.
std::string hmac_sha256_hex(const std::string& key, const std::string& message);

/// The callback body minus its signature, serialized with sorted keys.
std::string canonical_alarm_body(const Alarm& alarm);
/// Full callback body, signature included.
nlohmann::json signed_alarm_body(const Alarm& alarm, const std::string& secret);

struct TransportResponse {
    int status = 0;
    std::string body;
};

/// Posts `body` to `url`; throws on connection failure.
using WebhookTransport = std::function<TransportResponse(const std::string& url, const std::string& body)>;

enum class DeliveryStatus { ACCEPTED, REJECTED };

struct DeliveryReceipt {
    DeliveryStatus status = DeliveryStatus::REJECTED;
    int http_status = 0;
    int attempts = 0;
    std::string detail;
};

struct MonitorConfig {
    std::size_t retention = 10'000;
    int delivery_retries = 3;
    Duration delivery_backoff{std::chrono::milliseconds(200)};
    std::optional<std::filesystem::path> persistence_path;
};

class Monitor {
public:
    explicit Monitor(MonitorConfig config = {});

    Monitor(const Monitor&) = delete;
    Monitor& operator=(const Monitor&) = delete;

    /// Throws DomainError for consecutive < 1 or a reused alarm_id / rule_id.
    void add_rule(const AlertRule& rule);
    void remove_rule(const std::string& rule_id);
    void set_threshold(const std::string& rule_id, double threshold);
    std::vector<AlertRule> rules() const;

    /// Appends the sample and returns every alarm it fires. Fired alarms are
    /// also queued in the outbox for asynchronous delivery.
    std::vector<Alarm> ingest(const MetricSample& sample);

    /// Samples with start <= ts <= end, ascending.
    std::vector<MetricSample> query(VnfId vnf_id, const std::string& metric, Timestamp start, Timestamp end) const;

    /// Drains the alarms awaiting delivery.
    std::vector<Alarm> take_outbox();

    /// Posts one alarm, retrying transport failures and 5xx answers up to
    /// `delivery_retries` times. A 4xx answer is final. On exhaustion the alarm
    /// goes to the dead-letter list and DeliveryFailed is thrown.
    DeliveryReceipt deliver(const Alarm& alarm, const WebhookEndpoint& endpoint, const WebhookTransport& transport,
                            bool sleep_between_attempts = false);

    std::vector<Alarm> dead_letters() const;

private:
    struct StreamKey {
        VnfId vnf;
        std::string metric;
        auto operator<=>(const StreamKey&) const = default;
    };

    mutable std::mutex mu_;
    MonitorConfig config_;
    std::map<std::string, AlertRule> rules_;
    std::map<StreamKey, std::deque<MetricSample>> streams_;
    std::map<StreamKey, Timestamp> last_ts_;
    // Consecutive-satisfied counter per (rule, vnf); firing once it reaches the rule's count.
    std::map<std::pair<std::string, VnfId>, int> runs_;
    std::vector<Alarm> outbox_;
    std::vector<Alarm> dead_letters_;
    std::uint64_t next_alarm_ = 0;
    std::ofstream journal_;
};

enum class ReceiveStatus { ACCEPTED, REJECTED };

struct ReceiveResult {
    ReceiveStatus status = ReceiveStatus::REJECTED;
    int http_status = 401;
    std::string reason;
    std::vector<TaskId> tasks;
};

/// Orchestrator side of the alarm callback. Verifies the signature, then hands
/// the alarm to `dispatch`, which must throw UnknownAlarm for unbound ids.
class AlarmReceiver {
public:
    using Dispatch = std::function<std::vector<TaskId>(const Alarm&)>;

    AlarmReceiver(std::string secret, Dispatch dispatch);

    ReceiveResult receive(const std::string& body) const;

private:
    std::string secret_;
    Dispatch dispatch_;
};

}  // namespace oocran
