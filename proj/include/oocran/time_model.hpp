#pragma once

#include <span>
#include <utility>
#include <vector>

namespace oocran {

enum class TimeModelMode { TABLE, LINEAR };

struct TimeAnchor {
    int enodebs = 0;
    double seconds = 0.0;
};

/// VWI setup time as a function of eNodeB count.
///
/// TABLE mode is exact at the anchors, interpolates linearly between them and
/// extrapolates with the last segment's slope. LINEAR mode is a + b*n.
struct TimeModel {
    TimeModelMode mode = TimeModelMode::TABLE;
    std::vector<TimeAnchor> table;
    double a_s = 0.0;
    double b_s_per_enodeb = 1.0;

    /// Measured testbed setup times for 1, 5, 10, 20 and 30 eNodeBs.
    static TimeModel measured_table();
    /// Least-squares line through measured_table().
    static TimeModel fitted_linear();

    /// Throws BadConfig unless anchors increase strictly in both coordinates
    /// (TABLE) or the slope is positive (LINEAR).
    void validate() const;
};

double estimate_setup_time(int enodebs, const TimeModel& model);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
};

/// Ordinary least squares over (enodebs, seconds) points.
LinearFit fit_least_squares(std::span<const TimeAnchor> points);

}  // namespace oocran
