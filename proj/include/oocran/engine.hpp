#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oocran/events.hpp"
#include "oocran/model.hpp"
#include "oocran/rf.hpp"
#include "oocran/task_queue.hpp"
#include "oocran/time_model.hpp"
#include "oocran/vim.hpp"

namespace oocran {

struct EngineConfig {
    TimeModel time_model = TimeModel::measured_table();
    std::size_t max_live_ns = 0;  // 0 = unlimited
    int max_vcpus = 0;            // across live NSs; 0 = unlimited
    TaskQueueConfig queue;
};

/// Partial descriptor for reconfigure_ns. Only flavor, tx power, per-role VNF
/// counts and rule thresholds may change; the optional immutable fields are
/// accepted solely so that a full descriptor with unchanged values passes.
struct VnfPatch {
    std::string name;
    std::optional<Flavor> flavor;
    std::optional<double> tx_power_dbm;
    std::optional<std::string> image;
    std::optional<VnfRole> role;
    std::optional<std::vector<NetworkRole>> networks;
    std::optional<double> bandwidth_hz;
};

struct NsPatch {
    std::vector<VnfPatch> vnfs;
    std::map<VnfRole, int> role_counts;
    std::map<std::string, double> rule_thresholds;
    std::optional<std::string> name;
    std::optional<std::vector<NetworkSpec>> networks;
    std::optional<std::vector<ActuatorBinding>> actuator_bindings;
};

/// Throws InvalidPatch for unknown keys.
NsPatch parse_patch(const nlohmann::json& j);

/// Orchestrator and VNF manager. Turns NS commands into queued driver tasks
/// against the VIM and the radio pool and advances NS state machines as the
/// tasks complete and VMs finish booting.
///
/// Not internally synchronized: callers serialize access (the API service
/// holds one lock around every engine call).
class Engine {
public:
    using RuleThresholdHook = std::function<void(const std::string& rule_id, double threshold)>;
    using RedeployHook = std::function<void(NsId, const Actuator&)>;

    Engine(Vim& vim, RadioPool& pool, EventLog& events, EngineConfig config = {});

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Validates, creates the networks and queues slice-then-VM tasks for each
    /// VNF. Returns the NS in DEPLOYING (or FAILED when a task already failed
    /// and the rollback ran).
    NetworkService create_ns(const NsDescriptor& descriptor);
    void delete_ns(NsId id);
    NetworkService reconfigure_ns(NsId id, const NsPatch& patch);

    void register_actuator(const Actuator& actuator);
    std::vector<Actuator> actuators() const;

    /// Runs the actuator bound to `alarm_id` in the NS descriptor. A replayed
    /// alarm instance is ignored. When the NS is busy reconfiguring the alarm is
    /// parked for one retry and NSNotActive is thrown.
    std::vector<TaskId> execute_actuator(const std::string& alarm_id, NsId ns_id,
                                         std::optional<AlarmInstanceId> instance = std::nullopt);
    /// Resolves the NS owning alarm.vnf_id, then execute_actuator.
    std::vector<TaskId> handle_alarm(const Alarm& alarm);

    /// Runs queued tasks and settles NS states.
    void pump();
    /// VIRTUAL: moves to `t`, booting VMs in deadline order.
    void advance_to(Timestamp t);
    /// VIRTUAL: jumps to the next boot deadline. False when nothing is booting.
    bool step();
    /// REALTIME: processes VMs whose boot deadline has passed.
    void poll();
    /// Steps (VIRTUAL) until `done` holds or nothing is left to boot.
    void run_until(const std::function<bool()>& done);

    NetworkService ns(NsId id) const;
    bool has_ns(NsId id) const;
    std::vector<NetworkService> list() const;
    VnfInstance vnf(VnfId id) const;
    std::vector<VnfInstance> vnfs_of(NsId id) const;
    std::optional<NsId> ns_of_vnf(VnfId id) const;

    /// Flavors of every VNF in the descriptor, in order.
    static std::vector<Flavor> footprint(const NsDescriptor& d);

    TaskQueue& queue() { return queue_; }
    Vim& vim() { return vim_; }
    RadioPool& pool() { return pool_; }
    EventLog& events() { return events_; }
    const EngineConfig& config() const { return config_; }

    void set_rule_threshold_hook(RuleThresholdHook hook) { rule_hook_ = std::move(hook); }
    void set_redeploy_hook(RedeployHook hook) { redeploy_hook_ = std::move(hook); }

private:
    enum class Phase { NONE, ROLLING_BACK };

    struct NsRuntime {
        Phase phase = Phase::NONE;
        bool failed = false;
        Timestamp last_task_at{0};
        std::vector<VnfId> delta;  // VNFs added by the running create/reconfigure
    };

    struct ParkedAlarm {
        std::string alarm_id;
        NsId ns_id;
        std::optional<AlarmInstanceId> instance;
    };

    NetworkService& live(NsId id);
    void set_state(NsId id, NsState target, Timestamp at);
    VnfInstance& add_vnf(NetworkService& ns, const VnfDescriptor& d, double boot_s);
    std::vector<TaskId> enqueue_deploy(NetworkService& ns, VnfInstance& v);
    std::vector<TaskId> enqueue_teardown(NsId ns, VnfId v);
    std::vector<TaskId> apply_patch(NetworkService& ns, const NsPatch& patch);
    double boot_time_for(int enodeb_ordinal, bool incremental) const;
    std::vector<NetworkId> networks_for(const NetworkService& ns, const VnfDescriptor& d) const;

    void install_drivers();
    void drive_allocate_slice(const Task& t);
    void drive_deploy_vnf(const Task& t);
    void drive_delete_vnf(const Task& t);
    void drive_release_slice(const Task& t);
    void drive_reconfigure_vnf(const Task& t);
    void drive_run_actuator(const Task& t);
    void on_task_failed(const Task& t);
    std::vector<TaskId> execute_actuator_impl(const std::string& alarm_id, NsId ns_id,
                                              std::optional<AlarmInstanceId> instance, bool may_park);

    void handle_vm_events(const std::vector<VmEvent>& events);
    void reconcile(NsId id, Timestamp at);
    void reconcile_all(Timestamp at);
    void retry_parked(NsId id);
    void log(Timestamp ts, const std::string& kind, const std::string& id, const std::string& event,
             nlohmann::json detail = nullptr);

    Vim& vim_;
    RadioPool& pool_;
    EventLog& events_;
    EngineConfig config_;
    TaskQueue queue_;

    std::map<NsId, NetworkService> nss_;
    std::map<NsId, NsRuntime> runtime_;
    std::map<VnfId, VnfInstance> vnfs_;
    std::map<VnfId, double> boot_s_;
    std::map<VmId, VnfId> vm_to_vnf_;
    std::map<std::string, Actuator> actuators_;
    std::set<AlarmInstanceId> executed_alarms_;
    std::vector<ParkedAlarm> parked_;
    std::uint64_t next_ns_ = 0;
    std::uint64_t next_vnf_ = 0;
    bool pumping_ = false;

    RuleThresholdHook rule_hook_;
    RedeployHook redeploy_hook_;
};

}  // namespace oocran
