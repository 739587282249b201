#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include <json.hpp>

#include "oocran/common.hpp"

namespace oocran {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kThermalNoiseDbmPerHz = -174.0;

/// Friis free-space path loss between isotropic antennas, in dB.
double fspl_db(double distance_m, double frequency_hz);

/// Thermal noise floor over `bandwidth_hz` for an ideal (0 dB NF) receiver.
double noise_floor_dbm(double bandwidth_hz);

struct LinkBudget {
    double tx_power_dbm = 0.0;
    double frequency_hz = 0.0;
    double distance_m = 0.0;
    double bandwidth_hz = 0.0;
    double rx_power_dbm = 0.0;
    double noise_dbm = 0.0;
    double snr_db = 0.0;
    bool operational = false;
};

inline constexpr double kDefaultSnrThresholdDb = 10.0;

LinkBudget link_budget(double tx_power_dbm, double frequency_hz, double distance_m, double bandwidth_hz,
                       double snr_threshold_db = kDefaultSnrThresholdDb);

/// Disc area covered by an omnidirectional cell.
double coverage_area_m2(double cell_radius_m);

struct SpectrumSlice {
    SliceId id;
    double f_low_hz = 0.0;
    double f_high_hz = 0.0;
    double tx_power_dbm = 0.0;
    Point location;
    VnfId owner_vnf;

    double bandwidth_hz() const { return f_high_hz - f_low_hz; }
};

/// True when two slices would interfere: their bands overlap and their
/// transmitters sit within the reuse distance.
bool slices_conflict(const SpectrumSlice& a, const SpectrumSlice& b, double reuse_distance_m);

struct RadioPoolConfig {
    double f_start_hz = 2600e6;
    double f_end_hz = 2620e6;
    double reuse_distance_m = 60.0;
    double snr_threshold_db = kDefaultSnrThresholdDb;
};

/// Pool of spectrum shared by all radio VNFs. Allocation is first-fit at the
/// lowest frequency that does not interfere with any nearby slice.
class RadioPool {
public:
    explicit RadioPool(RadioPoolConfig config = {});

    RadioPool(const RadioPool&) = delete;
    RadioPool& operator=(const RadioPool&) = delete;

    const RadioPoolConfig& config() const { return config_; }

    /// Throws SpectrumExhausted or PowerExceedsLimit (when max_tx_power_dbm is given).
    SpectrumSlice allocate_slice(double bandwidth_hz, Point location, double tx_power_dbm, VnfId owner,
                                 std::optional<double> max_tx_power_dbm = std::nullopt);
    void release_slice(SliceId id);
    SpectrumSlice set_tx_power(SliceId id, double tx_power_dbm, std::optional<double> max_tx_power_dbm = std::nullopt);

    SpectrumSlice slice(SliceId id) const;
    std::vector<SpectrumSlice> slices() const;
    std::size_t size() const;

    nlohmann::json resource_snapshot() const;

private:
    mutable std::mutex mu_;
    RadioPoolConfig config_;
    std::map<SliceId, SpectrumSlice> slices_;
    std::uint64_t next_id_ = 0;
};

}  // namespace oocran
