#include "oocran/time_model.hpp"

#include "oocran/common.hpp"

namespace oocran {

TimeModel TimeModel::measured_table() {
    TimeModel tm;
    tm.mode = TimeModelMode::TABLE;
    tm.table = {{1, 30.12}, {5, 33.49}, {10, 45.87}, {20, 60.19}, {30, 84.63}};
    return tm;
}

TimeModel TimeModel::fitted_linear() {
    const auto table = measured_table().table;
    const auto fit = fit_least_squares(table);
    TimeModel tm;
    tm.mode = TimeModelMode::LINEAR;
    tm.table = table;
    tm.a_s = fit.intercept;
    tm.b_s_per_enodeb = fit.slope;
    return tm;
}

void TimeModel::validate() const {
    if (mode == TimeModelMode::LINEAR) {
        if (!(b_s_per_enodeb > 0.0)) throw Error(ErrorCode::BadConfig, "linear time model needs b > 0");
        return;
    }
    if (table.empty()) throw Error(ErrorCode::BadConfig, "table time model needs at least one anchor");
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (table[i].enodebs <= 0) throw Error(ErrorCode::BadConfig, "anchor eNodeB counts must be positive");
        if (i > 0 && (table[i].enodebs <= table[i - 1].enodebs || table[i].seconds <= table[i - 1].seconds)) {
            throw Error(ErrorCode::BadConfig, "table anchors must increase strictly in both coordinates");
        }
    }
}

double estimate_setup_time(int enodebs, const TimeModel& model) {
    if (enodebs < 0) throw Error(ErrorCode::DomainError, "eNodeB count must be non-negative");
    if (enodebs == 0) return 0.0;
    if (model.mode == TimeModelMode::LINEAR) return model.a_s + model.b_s_per_enodeb * enodebs;

    const auto& t = model.table;
    if (t.size() == 1) return t.front().seconds * enodebs / t.front().enodebs;
    auto lerp = [](const TimeAnchor& p, const TimeAnchor& q, double n) {
        return p.seconds + (q.seconds - p.seconds) * (n - p.enodebs) / (q.enodebs - p.enodebs);
    };
    if (enodebs <= t.front().enodebs) {
        // Below the first anchor: interpolate towards the origin (0 eNodeBs take 0 s).
        return lerp({0, 0.0}, t.front(), enodebs);
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (enodebs == t[i].enodebs) return t[i].seconds;
        if (enodebs < t[i].enodebs) return lerp(t[i - 1], t[i], enodebs);
    }
    return lerp(t[t.size() - 2], t.back(), enodebs);
}

LinearFit fit_least_squares(std::span<const TimeAnchor> points) {
    if (points.size() < 2) throw Error(ErrorCode::DomainError, "least squares needs two points");
    const double n = static_cast<double>(points.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : points) {
        sx += p.enodebs;
        sy += p.seconds;
        sxx += static_cast<double>(p.enodebs) * p.enodebs;
        sxy += p.enodebs * p.seconds;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw Error(ErrorCode::DomainError, "degenerate least-squares input");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    return fit;
}

}  // namespace oocran
