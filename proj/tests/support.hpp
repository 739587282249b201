#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oocran/system.hpp"

namespace testsupport {

using namespace oocran;

inline VnfDescriptor vnf(std::string name, VnfRole role, int vcpus = 2, std::vector<NetworkRole> nets = {NetworkRole::MANAGEMENT}) {
    VnfDescriptor v;
    v.name = std::move(name);
    v.image = "img";
    v.role = role;
    v.flavor = {vcpus, 2048};
    v.networks = std::move(nets);
    if (is_radio_role(role)) v.radio_requirements = RadioRequirements{1.4e6, 10.0};
    return v;
}

/// Data source plus eNodeB transmitter on a management and a dataflow subnet.
inline NsDescriptor downlink(std::string name = "lte-downlink") {
    NsDescriptor d;
    d.name = std::move(name);
    d.networks = {{NetworkRole::MANAGEMENT, "10.0.0.0/24"}, {NetworkRole::DATAFLOW, "10.0.1.0/24"}};
    d.vnfs = {vnf("source", VnfRole::DATA_SOURCE, 1, {NetworkRole::MANAGEMENT, NetworkRole::DATAFLOW}),
              vnf("enb-tx", VnfRole::ENODEB_TX, 2, {NetworkRole::MANAGEMENT, NetworkRole::DATAFLOW})};
    d.actuator_bindings = {{"cpu_load", "scale-enb"}};
    return d;
}

/// n eNodeBs on the management network only.
inline NsDescriptor enodebs(int n, std::string name = "cells") {
    NsDescriptor d;
    d.name = std::move(name);
    d.networks = {{NetworkRole::MANAGEMENT, "10.10.0.0/16"}};
    for (int i = 0; i < n; ++i) d.vnfs.push_back(vnf("enb-" + std::to_string(i + 1), VnfRole::ENODEB_TX));
    return d;
}

/// Two large hosts, one isolated RRH per cell and a 100 MHz pool.
inline Scenario relaxed_scenario(int rrhs = 70) {
    Scenario s = default_scenario();
    s.hosts = {{0, 96, 262144}, {1, 96, 262144}};
    s.rrhs.clear();
    for (int i = 0; i < rrhs; ++i) s.rrhs.push_back({i, {100.0 * (i % 10), 100.0 * (i / 10)}, 20e6, 20.0});
    s.pool.f_end_hz = 2700e6;
    return s;
}

inline bool overlaps(const SpectrumSlice& a, const SpectrumSlice& b) {
    return a.f_low_hz < b.f_high_hz && b.f_low_hz < a.f_high_hz;
}

/// O(n^2) check, independent of the allocator's own conflict test.
inline bool interference_free(const std::vector<SpectrumSlice>& slices, double reuse_m) {
    for (std::size_t i = 0; i < slices.size(); ++i) {
        for (std::size_t j = i + 1; j < slices.size(); ++j) {
            const double d = std::hypot(slices[i].location.x - slices[j].location.x,
                                        slices[i].location.y - slices[j].location.y);
            if (d <= reuse_m && overlaps(slices[i], slices[j])) return false;
        }
    }
    return true;
}

inline void settle(Engine& e) {
    while (e.step()) {
    }
}

inline Timestamp secs(double s) { return seconds_to_duration(s); }

}  // namespace testsupport
