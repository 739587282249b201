#include "oocran/rf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace oocran {

double fspl_db(double distance_m, double frequency_hz) {
    if (!(distance_m > 0.0) || !(frequency_hz > 0.0)) {
        throw Error(ErrorCode::DomainError, "fspl needs positive distance and frequency");
    }
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) +
           20.0 * std::log10(4.0 * std::numbers::pi / kSpeedOfLight);
}

double noise_floor_dbm(double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0)) throw Error(ErrorCode::DomainError, "bandwidth must be positive");
    return kThermalNoiseDbmPerHz + 10.0 * std::log10(bandwidth_hz);
}

LinkBudget link_budget(double tx_power_dbm, double frequency_hz, double distance_m, double bandwidth_hz,
                       double snr_threshold_db) {
    if (!std::isfinite(tx_power_dbm)) throw Error(ErrorCode::DomainError, "tx power must be finite");
    LinkBudget lb;
    lb.tx_power_dbm = tx_power_dbm;
    lb.frequency_hz = frequency_hz;
    lb.distance_m = distance_m;
    lb.bandwidth_hz = bandwidth_hz;
    lb.rx_power_dbm = tx_power_dbm - fspl_db(distance_m, frequency_hz);
    lb.noise_dbm = noise_floor_dbm(bandwidth_hz);
    lb.snr_db = lb.rx_power_dbm - lb.noise_dbm;
    lb.operational = lb.snr_db >= snr_threshold_db;
    return lb;
}

double coverage_area_m2(double cell_radius_m) {
    if (!(cell_radius_m >= 0.0)) throw Error(ErrorCode::DomainError, "cell radius must be non-negative");
    return std::numbers::pi * cell_radius_m * cell_radius_m;
}

bool slices_conflict(const SpectrumSlice& a, const SpectrumSlice& b, double reuse_distance_m) {
    const bool overlap = a.f_low_hz < b.f_high_hz && b.f_low_hz < a.f_high_hz;
    return overlap && distance(a.location, b.location) <= reuse_distance_m;
}

RadioPool::RadioPool(RadioPoolConfig config) : config_(config) {
    if (!(config_.f_start_hz < config_.f_end_hz)) throw Error(ErrorCode::BadConfig, "pool band edges out of order");
    if (!(config_.reuse_distance_m > 0.0)) throw Error(ErrorCode::BadConfig, "reuse distance must be positive");
}

SpectrumSlice RadioPool::allocate_slice(double bandwidth_hz, Point location, double tx_power_dbm, VnfId owner,
                                        std::optional<double> max_tx_power_dbm) {
    if (!(bandwidth_hz > 0.0)) throw Error(ErrorCode::DomainError, "slice bandwidth must be positive");
    if (max_tx_power_dbm && tx_power_dbm > *max_tx_power_dbm) {
        throw Error(ErrorCode::PowerExceedsLimit, std::to_string(tx_power_dbm) + " dBm exceeds RRH limit");
    }
    std::lock_guard lock(mu_);

    std::vector<const SpectrumSlice*> nearby;
    for (const auto& [id, s] : slices_) {
        if (distance(s.location, location) <= config_.reuse_distance_m) nearby.push_back(&s);
    }
    // The lowest feasible start is either the pool edge or the top of a nearby slice.
    std::vector<double> starts{config_.f_start_hz};
    for (const auto* s : nearby) starts.push_back(s->f_high_hz);
    std::sort(starts.begin(), starts.end());

    for (double lo : starts) {
        const double hi = lo + bandwidth_hz;
        if (lo < config_.f_start_hz || hi > config_.f_end_hz) continue;
        const bool clear = std::none_of(nearby.begin(), nearby.end(),
                                        [&](const SpectrumSlice* s) { return lo < s->f_high_hz && s->f_low_hz < hi; });
        if (!clear) continue;
        SpectrumSlice slice{SliceId{next_id_++}, lo, hi, tx_power_dbm, location, owner};
        slices_[slice.id] = slice;
        return slice;
    }
    throw Error(ErrorCode::SpectrumExhausted, "no " + std::to_string(bandwidth_hz) + " Hz gap free of interference");
}

void RadioPool::release_slice(SliceId id) {
    std::lock_guard lock(mu_);
    if (slices_.erase(id) == 0) throw Error(ErrorCode::UnknownSlice, id.str());
}

SpectrumSlice RadioPool::set_tx_power(SliceId id, double tx_power_dbm, std::optional<double> max_tx_power_dbm) {
    if (max_tx_power_dbm && tx_power_dbm > *max_tx_power_dbm) {
        throw Error(ErrorCode::PowerExceedsLimit, std::to_string(tx_power_dbm) + " dBm exceeds RRH limit");
    }
    std::lock_guard lock(mu_);
    auto it = slices_.find(id);
    if (it == slices_.end()) throw Error(ErrorCode::UnknownSlice, id.str());
    it->second.tx_power_dbm = tx_power_dbm;
    return it->second;
}

SpectrumSlice RadioPool::slice(SliceId id) const {
    std::lock_guard lock(mu_);
    auto it = slices_.find(id);
    if (it == slices_.end()) throw Error(ErrorCode::UnknownSlice, id.str());
    return it->second;
}

std::vector<SpectrumSlice> RadioPool::slices() const {
    std::lock_guard lock(mu_);
    std::vector<SpectrumSlice> out;
    for (const auto& [id, s] : slices_) out.push_back(s);
    return out;
}

std::size_t RadioPool::size() const {
    std::lock_guard lock(mu_);
    return slices_.size();
}

nlohmann::json RadioPool::resource_snapshot() const {
    std::lock_guard lock(mu_);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& [id, s] : slices_) {
        j.push_back({{"f_low_hz", s.f_low_hz},
                     {"f_high_hz", s.f_high_hz},
                     {"tx_power_dbm", s.tx_power_dbm},
                     {"x", s.location.x},
                     {"y", s.location.y}});
    }
    return j;
}

}  // namespace oocran
