#include "oocran/monitor.hpp"

#include <algorithm>
#include <thread>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "oocran/serialization.hpp"

namespace oocran {

std::string_view to_string(Predicate p) {
    switch (p) {
        case Predicate::GT: return "GT";
        case Predicate::LT: return "LT";
        case Predicate::GTE: return "GTE";
        case Predicate::LTE: return "LTE";
    }
    return "GT";
}

Predicate parse_predicate(std::string_view s) {
    if (s == "GT") return Predicate::GT;
    if (s == "LT") return Predicate::LT;
    if (s == "GTE") return Predicate::GTE;
    if (s == "LTE") return Predicate::LTE;
    throw Error(ErrorCode::ParseError, "unknown predicate '" + std::string(s) + "'");
}

bool holds(Predicate p, double value, double threshold) {
    switch (p) {
        case Predicate::GT: return value > threshold;
        case Predicate::LT: return value < threshold;
        case Predicate::GTE: return value >= threshold;
        case Predicate::LTE: return value <= threshold;
    }
    return false;
}

std::string hmac_sha256_hex(const std::string& key, const std::string& message) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
         reinterpret_cast<const unsigned char*>(message.data()), message.size(), digest, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
}

std::string canonical_alarm_body(const Alarm& alarm) { return json(alarm).dump(); }

json signed_alarm_body(const Alarm& alarm, const std::string& secret) {
    json body = alarm;
    body["signature"] = hmac_sha256_hex(secret, canonical_alarm_body(alarm));
    return body;
}

Monitor::Monitor(MonitorConfig config) : config_(std::move(config)) {
    if (config_.retention == 0) throw Error(ErrorCode::BadConfig, "retention must be positive");
    if (config_.persistence_path) {
        journal_.open(*config_.persistence_path, std::ios::app);
        if (!journal_) throw Error(ErrorCode::BadConfig, "cannot open " + config_.persistence_path->string());
    }
}

void Monitor::add_rule(const AlertRule& rule) {
    if (rule.consecutive < 1) throw Error(ErrorCode::DomainError, "consecutive must be >= 1");
    if (rule.rule_id.empty() || rule.alarm_id.empty() || rule.metric.empty()) {
        throw Error(ErrorCode::DomainError, "rule_id, metric and alarm_id are required");
    }
    std::lock_guard lock(mu_);
    if (rules_.contains(rule.rule_id)) throw Error(ErrorCode::DomainError, "duplicate rule " + rule.rule_id);
    for (const auto& [id, r] : rules_) {
        if (r.alarm_id == rule.alarm_id) throw Error(ErrorCode::DomainError, "alarm_id " + rule.alarm_id + " in use");
    }
    rules_[rule.rule_id] = rule;
}

void Monitor::remove_rule(const std::string& rule_id) {
    std::lock_guard lock(mu_);
    rules_.erase(rule_id);
    std::erase_if(runs_, [&](const auto& kv) { return kv.first.first == rule_id; });
}

void Monitor::set_threshold(const std::string& rule_id, double threshold) {
    std::lock_guard lock(mu_);
    auto it = rules_.find(rule_id);
    if (it == rules_.end()) throw Error(ErrorCode::DomainError, "unknown rule " + rule_id);
    it->second.threshold = threshold;
}

std::vector<AlertRule> Monitor::rules() const {
    std::lock_guard lock(mu_);
    std::vector<AlertRule> out;
    for (const auto& [id, r] : rules_) out.push_back(r);
    return out;
}

std::vector<Alarm> Monitor::ingest(const MetricSample& sample) {
    std::lock_guard lock(mu_);
    const StreamKey key{sample.vnf_id, sample.metric};
    if (auto last = last_ts_.find(key); last != last_ts_.end() && sample.ts < last->second) {
        throw Error(ErrorCode::StaleSample, sample.vnf_id.str() + "/" + sample.metric + " went back in time");
    }
    last_ts_[key] = sample.ts;
    auto& stream = streams_[key];
    stream.push_back(sample);
    if (stream.size() > config_.retention) stream.pop_front();
    if (journal_.is_open()) {
        journal_ << json{{"vnf_id", sample.vnf_id.str()},
                         {"metric", sample.metric},
                         {"value", sample.value},
                         {"ts", sample.ts.count()}}
                        .dump()
                 << '\n';
        journal_.flush();
    }

    std::vector<Alarm> fired;
    for (const auto& [id, rule] : rules_) {
        if (rule.metric != sample.metric) continue;
        int& run = runs_[{rule.rule_id, sample.vnf_id}];
        if (!holds(rule.predicate, sample.value, rule.threshold)) {
            run = 0;
            continue;
        }
        // Fires exactly when the run reaches the count, so a longer run never re-fires.
        if (++run != rule.consecutive) continue;
        Alarm alarm;
        alarm.alarm_id = rule.alarm_id;
        alarm.instance = AlarmInstanceId{next_alarm_++};
        alarm.rule_id = rule.rule_id;
        alarm.vnf_id = sample.vnf_id;
        alarm.fired_at = sample.ts;
        alarm.payload = {{"metric", sample.metric}, {"value", json(sample.value).dump()}};
        fired.push_back(alarm);
        outbox_.push_back(alarm);
    }
    return fired;
}

std::vector<MetricSample> Monitor::query(VnfId vnf_id, const std::string& metric, Timestamp start,
                                         Timestamp end) const {
    if (start > end) throw Error(ErrorCode::DomainError, "window start after end");
    std::lock_guard lock(mu_);
    std::vector<MetricSample> out;
    auto it = streams_.find(StreamKey{vnf_id, metric});
    if (it == streams_.end()) return out;
    for (const auto& s : it->second) {
        if (s.ts >= start && s.ts <= end) out.push_back(s);
    }
    return out;
}

std::vector<Alarm> Monitor::take_outbox() {
    std::lock_guard lock(mu_);
    return std::exchange(outbox_, {});
}

DeliveryReceipt Monitor::deliver(const Alarm& alarm, const WebhookEndpoint& endpoint,
                                 const WebhookTransport& transport, bool sleep_between_attempts) {
    if (endpoint.secret.empty()) throw Error(ErrorCode::BadConfig, "webhook secret must be non-empty");
    const std::string body = signed_alarm_body(alarm, endpoint.secret).dump();
    DeliveryReceipt receipt;
    std::string last_error;
    const int max_attempts = config_.delivery_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        receipt.attempts = attempt;
        if (attempt > 1 && sleep_between_attempts) std::this_thread::sleep_for(config_.delivery_backoff);
        try {
            const auto resp = transport(endpoint.url, body);
            receipt.http_status = resp.status;
            receipt.detail = resp.body;
            if (resp.status >= 200 && resp.status < 300) {
                receipt.status = DeliveryStatus::ACCEPTED;
                return receipt;
            }
            if (resp.status >= 400 && resp.status < 500) {
                receipt.status = DeliveryStatus::REJECTED;
                return receipt;
            }
            last_error = "HTTP " + std::to_string(resp.status);
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    {
        std::lock_guard lock(mu_);
        dead_letters_.push_back(alarm);
    }
    throw Error(ErrorCode::DeliveryFailed,
                alarm.instance.str() + " after " + std::to_string(max_attempts) + " attempts: " + last_error);
}

std::vector<Alarm> Monitor::dead_letters() const {
    std::lock_guard lock(mu_);
    return dead_letters_;
}

AlarmReceiver::AlarmReceiver(std::string secret, Dispatch dispatch)
    : secret_(std::move(secret)), dispatch_(std::move(dispatch)) {}

ReceiveResult AlarmReceiver::receive(const std::string& body) const {
    ReceiveResult r;
    Alarm alarm;
    std::string signature;
    try {
        const json j = json::parse(body);
        signature = j.at("signature").get<std::string>();
        alarm = j.get<Alarm>();
    } catch (const std::exception& e) {
        r.http_status = 400;
        r.reason = std::string("malformed alarm: ") + e.what();
        return r;
    }
    const std::string expected = hmac_sha256_hex(secret_, canonical_alarm_body(alarm));
    if (signature.size() != expected.size() ||
        CRYPTO_memcmp(signature.data(), expected.data(), expected.size()) != 0) {
        r.http_status = 401;
        r.reason = "signature mismatch";
        return r;
    }
    try {
        r.tasks = dispatch_(alarm);
        r.status = ReceiveStatus::ACCEPTED;
        r.http_status = 202;
        r.reason = "accepted";
    } catch (const Error& e) {
        switch (e.code()) {
            case ErrorCode::UnknownAlarm:
            case ErrorCode::UnknownNS: r.http_status = 404; break;
            case ErrorCode::NSNotActive: r.http_status = 409; break;
            default: r.http_status = 422; break;
        }
        r.reason = e.what();
    }
    return r;
}

}  // namespace oocran
