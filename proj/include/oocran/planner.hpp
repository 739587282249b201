#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oocran/engine.hpp"
#include "oocran/time_model.hpp"

namespace oocran {

struct VwiDescriptor {
    std::string name;
    double target_area_m2 = 0.0;
    std::vector<Point> region;  // optional bounding polygon; overrides target_area_m2 when set
    double cell_radius_m = 30.0;
    double channel_bandwidth_hz = 1.4e6;
    std::map<std::string, double> traffic_profile;
};

void to_json(nlohmann::json& j, const VwiDescriptor& v);
void from_json(const nlohmann::json& j, VwiDescriptor& v);

struct DeploymentPlan {
    int n_enodebs = 0;
    std::vector<Point> placements;
    double covered_area_m2 = 0.0;
    double estimated_setup_s = 0.0;  // under the configured time model
    double linear_estimate_s = 0.0;  // least-squares line through the model's anchors
    double cell_radius_m = 0.0;
};

void to_json(nlohmann::json& j, const DeploymentPlan& p);

/// Shoelace area of a simple polygon.
double polygon_area(const std::vector<Point>& polygon);

/// Cell count from area division, hexagonal placements and setup-time estimate.
DeploymentPlan plan_vwi(const VwiDescriptor& desc, const TimeModel& tm);

/// `n` centres of a hexagonal grid with pitch sqrt(3)*r, taken nearest-first
/// from the centre of the target region (a square of `area_m2` when no polygon
/// is given), preferring points inside the region.
std::vector<Point> hex_placements(int n, double cell_radius_m, double area_m2, const std::vector<Point>& region = {});

/// Shape of the NS generated for a VWI: one ENODEB_TX per cell.
struct VwiTemplate {
    Flavor enodeb_flavor{2, 2048};
    std::string image = "enodeb";
    double tx_power_dbm = 10.0;
    std::string mgmt_cidr = "10.10.0.0/16";
    std::string dataflow_cidr = "10.20.0.0/16";
    std::vector<ActuatorBinding> actuator_bindings;
};

NsDescriptor vwi_to_ns_descriptor(const VwiDescriptor& desc, const DeploymentPlan& plan, const VwiTemplate& tmpl = {});

/// Stored VWI designs, selected by nearest traffic profile.
class VwiRepository {
public:
    void put(const VwiDescriptor& desc);
    /// Minimizes Euclidean distance over the demand's numeric fields, each
    /// normalized by its range across the stored entries. Ties go to the
    /// earliest insertion. Throws EmptyRepository.
    VwiDescriptor select(const std::map<std::string, double>& demand) const;
    std::size_t size() const { return entries_.size(); }
    const std::vector<VwiDescriptor>& entries() const { return entries_; }

private:
    std::vector<VwiDescriptor> entries_;
};

enum class SwapStrategy { HARD, SOFT_HANDOVER, REPOSITORY };
std::string_view to_string(SwapStrategy s);
SwapStrategy parse_swap_strategy(std::string_view s);

struct SwapReport {
    SwapStrategy strategy = SwapStrategy::HARD;
    NsId old_ns;
    NsId new_ns;
    std::string selected_vwi;
    int new_enodebs = 0;
    double started_at_s = 0.0;
    double service_lost_at_s = 0.0;  // old NS left ACTIVE
    double new_active_at_s = 0.0;
    double downtime_s = 0.0;
    int peak_vm_count = 0;  // VMs of old + new NS held at once
    int old_vm_count = 0;
    int new_vm_count = 0;
};

void to_json(nlohmann::json& j, const SwapReport& r);

/// One swap in progress. start() issues the first commands; advance() is
/// called after every engine step and returns true once the swap settled.
class SwapOperation {
public:
    SwapOperation(Engine& engine, NsId old_ns, NsDescriptor new_descriptor, SwapStrategy strategy,
                  std::string selected_vwi = {});

    void start();
    bool advance();
    bool finished() const { return finished_; }
    /// Throws InsufficientCapacity when the new NS failed to deploy.
    SwapReport report() const;
    NsId old_ns() const { return old_; }
    std::optional<NsId> new_ns() const { return new_; }

private:
    int vm_count(NsId id) const;
    void sample_peak();

    Engine* engine_;
    NsId old_;
    NsDescriptor desc_;
    SwapStrategy strategy_;
    std::string selected_;
    std::optional<NsId> new_;
    bool finished_ = false;
    bool failed_ = false;
    int peak_ = 0;
    int old_vms_ = 0;
    Timestamp started_{0};
};

struct PlannerConfig {
    TimeModel time_model = TimeModel::measured_table();
    VwiTemplate vwi_template;
    double min_swap_interval_s = 0.0;
};

class Planner {
public:
    explicit Planner(PlannerConfig config = {});

    DeploymentPlan plan(const VwiDescriptor& desc) const { return plan_vwi(desc, config_.time_model); }
    double estimate(int enodebs) const { return estimate_setup_time(enodebs, config_.time_model); }
    NsDescriptor to_ns(const VwiDescriptor& desc) const;

    VwiRepository& repository() { return repository_; }
    const PlannerConfig& config() const { return config_; }

    /// Validates strategy preconditions (capacity, repository, interval) and
    /// returns a started operation.
    SwapOperation begin_swap(Engine& engine, NsId old_ns, const VwiDescriptor& target, SwapStrategy strategy);
    /// Runs a swap to completion in VIRTUAL time.
    SwapReport swap(Engine& engine, NsId old_ns, const VwiDescriptor& target, SwapStrategy strategy);
    /// Records a finished swap for the interval guard.
    void note_swap(const SwapReport& report, Timestamp at);

private:
    PlannerConfig config_;
    VwiRepository repository_;
    std::map<NsId, Timestamp> last_swap_;
};

}  // namespace oocran
