#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oocran/engine.hpp"
#include "oocran/events.hpp"
#include "oocran/monitor.hpp"
#include "oocran/planner.hpp"
#include "oocran/rf.hpp"
#include "oocran/vim.hpp"

namespace oocran {

struct HostSpec {
    int id = 0;
    int vcpus = 24;
    int ram_mb = 65536;
};

struct RrhSpec {
    int id = 0;
    Point location;
    double max_bandwidth_hz = 20e6;
    double max_tx_power_dbm = 20.0;
};

/// Everything a scenario file can declare.
struct Scenario {
    ClockMode clock = ClockMode::VIRTUAL;
    std::vector<HostSpec> hosts;
    std::vector<RrhSpec> rrhs;
    RadioPoolConfig pool;
    EngineConfig engine;
    MonitorConfig monitor;
    PlannerConfig planner;
    std::vector<Actuator> actuators;
    std::vector<AlertRule> rules;
    std::vector<VwiDescriptor> repository;
    nlohmann::json workload = nlohmann::json::array();
    std::filesystem::path base_dir;  // relative paths in the workload resolve against this
};

/// Two 24-vCPU compute hosts and five RRHs. Compute-host RAM is not known
/// for the reference cluster; 64 GB per host is assumed.
Scenario default_scenario();

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// One orchestrator instance with its simulated infrastructure.
class System {
public:
    explicit System(const Scenario& scenario, std::string webhook_secret = "oocran-secret");

    System(const System&) = delete;
    System& operator=(const System&) = delete;

    Vim& vim() { return vim_; }
    RadioPool& pool() { return pool_; }
    EventLog& events() { return events_; }
    Engine& engine() { return *engine_; }
    Monitor& monitor() { return monitor_; }
    Planner& planner() { return planner_; }
    const AlarmReceiver& receiver() const { return receiver_; }
    const std::string& webhook_secret() const { return secret_; }
    const Scenario& scenario() const { return scenario_; }

    /// Call after anything that may have advanced NS state: starts swaps that
    /// REDEPLOY_VWI actuators requested and settles running swaps.
    void after_progress();
    /// VIRTUAL: one boot deadline forward. False when idle.
    bool step();
    /// VIRTUAL: advance to `t` deadline by deadline.
    void advance_to(Timestamp t);
    /// REALTIME: boot what is due.
    void poll();

    /// Returns the operation as started; the live one is owned by the system.
    SwapOperation start_swap(NsId old_ns, const VwiDescriptor& target, SwapStrategy strategy);
    bool swaps_pending() const;
    const std::vector<SwapReport>& swap_reports() const { return reports_; }

    /// Transport that hands callbacks straight to this system's receiver.
    WebhookTransport loopback_transport();
    /// Delivers every alarm in the monitor outbox.
    std::vector<DeliveryReceipt> deliver_alarms(const WebhookEndpoint& endpoint, const WebhookTransport& transport);

    nlohmann::json infrastructure() const;
    /// Hosts, network address sets and spectrum: the state leak checks compare.
    nlohmann::json resource_snapshot() const;

private:
    Scenario scenario_;
    std::string secret_;
    Vim vim_;
    RadioPool pool_;
    EventLog events_;
    std::unique_ptr<Engine> engine_;
    Monitor monitor_;
    Planner planner_;
    AlarmReceiver receiver_;
    std::vector<std::pair<NsId, Actuator>> redeploys_;
    std::vector<SwapOperation> swaps_;
    std::vector<SwapReport> reports_;
};

struct SimulationResult {
    std::vector<Event> events;
    std::vector<SwapReport> swaps;
    std::map<std::string, NsId> labels;
    Timestamp ended_at{0};
};

/// Runs the scenario workload in VIRTUAL time up to `until`.
///
/// Workload entries: {at, action, ...} with action one of deploy (descriptor
/// path or inline object), deploy_vwi (n_enodebs or area_m2), delete,
/// reconfigure, swap, metric. `as` names the NS an entry creates; `ns` refers
/// to a name given earlier.
SimulationResult run_simulation(System& system, Timestamp until);

}  // namespace oocran
