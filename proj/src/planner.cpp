#include "oocran/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oocran/rf.hpp"
#include "oocran/serialization.hpp"

namespace oocran {

void to_json(nlohmann::json& j, const VwiDescriptor& v) {
    j = nlohmann::json{{"name", v.name},
                       {"target_area_m2", v.target_area_m2},
                       {"cell_radius_m", v.cell_radius_m},
                       {"channel_bandwidth_hz", v.channel_bandwidth_hz},
                       {"traffic_profile", v.traffic_profile}};
    if (!v.region.empty()) {
        auto& r = j["region"] = nlohmann::json::array();
        for (const auto& p : v.region) r.push_back({p.x, p.y});
    }
}

void from_json(const nlohmann::json& j, VwiDescriptor& v) {
    v.name = j.value("name", std::string("vwi"));
    v.target_area_m2 = j.value("target_area_m2", 0.0);
    v.cell_radius_m = j.value("cell_radius_m", 30.0);
    v.channel_bandwidth_hz = j.value("channel_bandwidth_hz", 1.4e6);
    v.traffic_profile.clear();
    if (j.contains("traffic_profile")) {
        for (const auto& [k, val] : j.at("traffic_profile").items()) v.traffic_profile[k] = val.get<double>();
    }
    v.region.clear();
    if (j.contains("region")) {
        for (const auto& p : j.at("region")) v.region.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    }
}

void to_json(nlohmann::json& j, const DeploymentPlan& p) {
    auto placements = nlohmann::json::array();
    for (const auto& pt : p.placements) placements.push_back({pt.x, pt.y});
    j = nlohmann::json{{"n_enodebs", p.n_enodebs},
                       {"cell_radius_m", p.cell_radius_m},
                       {"covered_area_m2", p.covered_area_m2},
                       {"estimated_setup_s", p.estimated_setup_s},
                       {"linear_estimate_s", p.linear_estimate_s},
                       {"placements", placements}};
}

double polygon_area(const std::vector<Point>& polygon) {
    double twice = 0.0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % polygon.size()];
        twice += a.x * b.y - b.x * a.y;
    }
    return std::abs(twice) / 2.0;
}

namespace {

bool inside_polygon(const Point& p, const std::vector<Point>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
    }
    return in;
}

double region_area(const VwiDescriptor& d) { return d.region.size() >= 3 ? polygon_area(d.region) : d.target_area_m2; }

}  // namespace

std::vector<Point> hex_placements(int n, double cell_radius_m, double area_m2, const std::vector<Point>& region) {
    if (n <= 0) return {};
    const double pitch = std::sqrt(3.0) * cell_radius_m;
    const double row = 1.5 * cell_radius_m;

    Point centre;
    std::vector<Point> poly = region;
    if (poly.size() >= 3) {
        for (const auto& p : poly) {
            centre.x += p.x / static_cast<double>(poly.size());
            centre.y += p.y / static_cast<double>(poly.size());
        }
    } else {
        const double h = std::sqrt(std::max(area_m2, 0.0)) / 2.0;
        poly = {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
    }

    struct Candidate {
        Point p;
        bool inside;
        double dist;
    };
    std::vector<Candidate> cands;
    const int k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))) + 2;
    double extent = 0.0;
    for (const auto& p : poly) extent = std::max(extent, distance(p, centre));
    const int reach = std::max(k, static_cast<int>(std::ceil(extent / row)) + 1);
    for (int j = -reach; j <= reach; ++j) {
        const double shift = (j & 1) ? pitch / 2.0 : 0.0;
        for (int i = -reach; i <= reach; ++i) {
            const Point p{centre.x + i * pitch + shift, centre.y + j * row};
            cands.push_back({p, inside_polygon(p, poly), distance(p, centre)});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.inside != b.inside) return a.inside;
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.p < b.p;
    });
    std::vector<Point> out;
    for (int i = 0; i < n && i < static_cast<int>(cands.size()); ++i) out.push_back(cands[static_cast<std::size_t>(i)].p);
    return out;
}

DeploymentPlan plan_vwi(const VwiDescriptor& desc, const TimeModel& tm) {
    const double area = region_area(desc);
    if (!(area > 0.0)) throw Error(ErrorCode::DomainError, "target area must be positive");
    if (!(desc.cell_radius_m > 0.0)) throw Error(ErrorCode::DomainError, "cell radius must be positive");
    const double cell = coverage_area_m2(desc.cell_radius_m);
    // Relative slack so an area that is an exact multiple of a cell does not round up.
    const double cells = area / cell;
    DeploymentPlan plan;
    plan.n_enodebs = std::max(1, static_cast<int>(std::ceil(cells * (1.0 - 1e-12))));
    plan.cell_radius_m = desc.cell_radius_m;
    plan.covered_area_m2 = plan.n_enodebs * cell;
    plan.placements = hex_placements(plan.n_enodebs, desc.cell_radius_m, area, desc.region);
    plan.estimated_setup_s = estimate_setup_time(plan.n_enodebs, tm);
    if (tm.mode == TimeModelMode::LINEAR) {
        plan.linear_estimate_s = plan.estimated_setup_s;
    } else {
        const auto fit = fit_least_squares(tm.table);
        plan.linear_estimate_s = fit.intercept + fit.slope * plan.n_enodebs;
    }
    return plan;
}

NsDescriptor vwi_to_ns_descriptor(const VwiDescriptor& desc, const DeploymentPlan& plan, const VwiTemplate& tmpl) {
    NsDescriptor ns;
    ns.name = desc.name.empty() ? "vwi" : desc.name;
    ns.networks = {{NetworkRole::MANAGEMENT, tmpl.mgmt_cidr}, {NetworkRole::DATAFLOW, tmpl.dataflow_cidr}};
    ns.actuator_bindings = tmpl.actuator_bindings;
    for (int i = 0; i < plan.n_enodebs; ++i) {
        VnfDescriptor v;
        v.name = "enb-" + std::to_string(i + 1);
        v.image = tmpl.image;
        v.flavor = tmpl.enodeb_flavor;
        v.role = VnfRole::ENODEB_TX;
        v.networks = {NetworkRole::MANAGEMENT, NetworkRole::DATAFLOW};
        v.radio_requirements = RadioRequirements{desc.channel_bandwidth_hz, tmpl.tx_power_dbm};
        ns.vnfs.push_back(v);
    }
    return ns;
}

void VwiRepository::put(const VwiDescriptor& desc) { entries_.push_back(desc); }

VwiDescriptor VwiRepository::select(const std::map<std::string, double>& demand) const {
    if (entries_.empty()) throw Error(ErrorCode::EmptyRepository, "no stored VWI designs");
    auto value = [](const VwiDescriptor& d, const std::string& key) {
        auto it = d.traffic_profile.find(key);
        return it == d.traffic_profile.end() ? 0.0 : it->second;
    };
    std::map<std::string, double> scale;
    for (const auto& [key, want] : demand) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& e : entries_) {
            lo = std::min(lo, value(e, key));
            hi = std::max(hi, value(e, key));
        }
        scale[key] = hi > lo ? hi - lo : 1.0;
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        double d2 = 0.0;
        for (const auto& [key, want] : demand) {
            const double diff = (value(entries_[i], key) - want) / scale[key];
            d2 += diff * diff;
        }
        if (d2 < best_d) {  // strict: earlier entry wins ties
            best_d = d2;
            best = i;
        }
    }
    return entries_[best];
}

std::string_view to_string(SwapStrategy s) {
    switch (s) {
        case SwapStrategy::HARD: return "HARD";
        case SwapStrategy::SOFT_HANDOVER: return "SOFT_HANDOVER";
        case SwapStrategy::REPOSITORY: return "REPOSITORY";
    }
    return "HARD";
}

SwapStrategy parse_swap_strategy(std::string_view s) {
    if (s == "HARD") return SwapStrategy::HARD;
    if (s == "SOFT_HANDOVER" || s == "SOFT") return SwapStrategy::SOFT_HANDOVER;
    if (s == "REPOSITORY") return SwapStrategy::REPOSITORY;
    throw Error(ErrorCode::ParseError, "unknown swap strategy '" + std::string(s) + "'");
}

void to_json(nlohmann::json& j, const SwapReport& r) {
    j = nlohmann::json{{"strategy", std::string(to_string(r.strategy))},
                       {"old_ns", r.old_ns.str()},
                       {"new_ns", r.new_ns.str()},
                       {"selected_vwi", r.selected_vwi},
                       {"new_enodebs", r.new_enodebs},
                       {"started_at_s", r.started_at_s},
                       {"service_lost_at_s", r.service_lost_at_s},
                       {"new_active_at_s", r.new_active_at_s},
                       {"downtime_s", r.downtime_s},
                       {"peak_vm_count", r.peak_vm_count},
                       {"old_vm_count", r.old_vm_count},
                       {"new_vm_count", r.new_vm_count}};
}

SwapOperation::SwapOperation(Engine& engine, NsId old_ns, NsDescriptor new_descriptor, SwapStrategy strategy,
                             std::string selected_vwi)
    : engine_(&engine), old_(old_ns), desc_(std::move(new_descriptor)), strategy_(strategy),
      selected_(std::move(selected_vwi)) {}

int SwapOperation::vm_count(NsId id) const {
    if (!engine_->has_ns(id)) return 0;
    int n = 0;
    for (const auto& v : engine_->vnfs_of(id)) n += v.vm_id.has_value();
    return n;
}

void SwapOperation::sample_peak() {
    peak_ = std::max(peak_, vm_count(old_) + (new_ ? vm_count(*new_) : 0));
}

void SwapOperation::start() {
    started_ = engine_->vim().now();
    old_vms_ = vm_count(old_);
    sample_peak();
    if (strategy_ == SwapStrategy::HARD) engine_->delete_ns(old_);
    new_ = engine_->create_ns(desc_).id;
    sample_peak();
    advance();
}

bool SwapOperation::advance() {
    if (finished_) return true;
    if (!new_) return false;
    sample_peak();
    const auto state = engine_->ns(*new_).state;
    if (state == NsState::FAILED) {
        failed_ = true;
        finished_ = true;
    } else if (state == NsState::ACTIVE) {
        if (strategy_ != SwapStrategy::HARD) engine_->delete_ns(old_);
        finished_ = true;
    }
    return finished_;
}

SwapReport SwapOperation::report() const {
    if (failed_) {
        throw Error(ErrorCode::InsufficientCapacity,
                    "replacement " + (new_ ? new_->str() : std::string("NS")) + " failed to deploy");
    }
    SwapReport r;
    r.strategy = strategy_;
    r.old_ns = old_;
    r.new_ns = new_.value_or(NsId{});
    r.selected_vwi = selected_;
    r.new_enodebs = static_cast<int>(std::count_if(desc_.vnfs.begin(), desc_.vnfs.end(),
                                                   [](const auto& v) { return v.role == VnfRole::ENODEB_TX; }));
    r.started_at_s = to_seconds(started_);
    r.peak_vm_count = peak_;
    r.old_vm_count = old_vms_;
    if (!finished_ || !new_) return r;

    const auto old_ns = engine_->ns(old_);
    const auto new_ns = engine_->ns(*new_);
    Timestamp lost = started_;
    for (const auto& e : old_ns.history) {
        if (e.from == NsState::ACTIVE && e.to == NsState::TERMINATING && e.at >= started_) lost = e.at;
    }
    Timestamp active = started_;
    for (const auto& e : new_ns.history) {
        if (e.to == NsState::ACTIVE) {
            active = e.at;
            break;
        }
    }
    r.service_lost_at_s = to_seconds(lost);
    r.new_active_at_s = to_seconds(active);
    r.downtime_s = active > lost ? to_seconds(active - lost) : 0.0;
    r.new_vm_count = static_cast<int>(new_ns.vnf_instances.size());
    return r;
}

Planner::Planner(PlannerConfig config) : config_(std::move(config)) { config_.time_model.validate(); }

NsDescriptor Planner::to_ns(const VwiDescriptor& desc) const {
    return vwi_to_ns_descriptor(desc, plan(desc), config_.vwi_template);
}

SwapOperation Planner::begin_swap(Engine& engine, NsId old_ns, const VwiDescriptor& target, SwapStrategy strategy) {
    const auto old = engine.ns(old_ns);
    if (old.state != NsState::ACTIVE) throw Error(ErrorCode::NSNotActive, old_ns.str() + " is not ACTIVE");
    if (auto it = last_swap_.find(old_ns); it != last_swap_.end() && config_.min_swap_interval_s > 0.0) {
        if (engine.vim().now() - it->second < seconds_to_duration(config_.min_swap_interval_s)) {
            throw Error(ErrorCode::SwapTooSoon, old_ns.str() + " was swapped less than " +
                                                    std::to_string(config_.min_swap_interval_s) + " s ago");
        }
    }

    VwiDescriptor chosen = target;
    std::string selected;
    if (strategy == SwapStrategy::REPOSITORY) {
        chosen = repository_.select(target.traffic_profile);
        selected = chosen.name;
    }
    const NsDescriptor desc = to_ns(chosen);
    if (auto v = validate_descriptor(desc); !v.empty()) {
        throw Error(ErrorCode::ValidationFailed, "generated VWI descriptor is invalid");
    }

    if (strategy != SwapStrategy::HARD) {
        // Both footprints must coexist: hosts for every VM and one free RRH per radio VNF.
        const auto flavors = Engine::footprint(desc);
        int radios = 0;
        for (const auto& v : desc.vnfs) radios += v.radio_requirements.has_value();
        int free_rrhs = 0;
        for (const auto& r : engine.vim().rrhs()) free_rrhs += !r.attached_vnf;
        if (!engine.vim().can_place(flavors) || free_rrhs < radios) {
            throw Error(ErrorCode::InsufficientCapacity, "cluster cannot hold the old and new VWI at once");
        }
    }

    SwapOperation op(engine, old_ns, desc, strategy,
                     selected);
    op.start();
    return op;
}

SwapReport Planner::swap(Engine& engine, NsId old_ns, const VwiDescriptor& target, SwapStrategy strategy) {
    auto op = begin_swap(engine, old_ns, target, strategy);
    engine.run_until([&] { return op.advance(); });
    if (!op.finished()) throw Error(ErrorCode::DomainError, "swap of " + old_ns.str() + " did not settle");
    auto report = op.report();
    report.strategy = strategy;
    note_swap(report, engine.vim().now());
    return report;
}

void Planner::note_swap(const SwapReport& report, Timestamp at) { last_swap_[report.new_ns] = at; }

}  // namespace oocran
