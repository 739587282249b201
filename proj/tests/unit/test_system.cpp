#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace oocran;
using namespace testsupport;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(OOCRAN_SOURCE_DIR) / "scenarios";

const Event* find(const std::vector<Event>& events, const std::string& kind, const std::string& event) {
    auto it = std::find_if(events.begin(), events.end(),
                           [&](const Event& e) { return e.entity_kind == kind && e.event == event; });
    return it == events.end() ? nullptr : &*it;
}

}  // namespace

TEST_CASE("default scenario shape") {
    const auto s = default_scenario();
    CHECK(s.hosts.size() == 2);
    CHECK(s.hosts[0].vcpus == 24);
    CHECK(s.rrhs.size() == 5);
    System sys(s);
    CHECK(sys.vim().hosts().size() == 2);
    CHECK(sys.vim().rrhs().size() == 5);
    const auto infra = sys.infrastructure();
    CHECK(infra.at("hosts").size() == 2);
    CHECK(infra.contains("pool"));
}

TEST_CASE("scenario parsing") {
    SUBCASE("all shipped scenarios load") {
        for (auto name : {"default.yaml", "setup-times.yaml", "campus.yaml"}) {
            CAPTURE(name);
            CHECK_NOTHROW(load_scenario(kScenarios / name));
        }
    }
    SUBCASE("table in either form") {
        const auto s = parse_scenario(nlohmann::json::parse(R"({
            "time_model": {"mode": "TABLE", "table": [[1, 10], {"enodebs": 4, "seconds": 20}]}
        })"));
        CHECK(estimate_setup_time(2, s.engine.time_model) == doctest::Approx(10.0 + 10.0 / 3.0));
        CHECK(estimate_setup_time(2, s.planner.time_model) == doctest::Approx(10.0 + 10.0 / 3.0));
    }
    SUBCASE("rrh grid is square") {
        const auto s = parse_scenario(nlohmann::json::parse(R"({"rrh_grid": {"count": 9, "spacing_m": 50}})"));
        REQUIRE(s.rrhs.size() == 9);
        CHECK(s.rrhs[4].location.x == 50.0);
        CHECK(s.rrhs[4].location.y == 50.0);
    }
    SUBCASE("bad input is BadConfig") {
        for (auto text : {R"({"hosts": "many"})", R"({"clock": "SUNDIAL"})", R"({"time_model": {"mode": "GUESS"}})"}) {
            CAPTURE(text);
            try {
                parse_scenario(nlohmann::json::parse(text));
                FAIL("expected BadConfig");
            } catch (const Error& e) {
                CHECK(e.code() == ErrorCode::BadConfig);
            }
        }
        CHECK_THROWS_AS(load_scenario(kScenarios / "missing.yaml"), Error);
    }
}

TEST_CASE("simulate: default alarm loop") {
    System sys(load_scenario(kScenarios / "default.yaml"));
    const auto result = run_simulation(sys, Timestamp::max());
    const auto ns = result.labels.at("downlink");
    const auto active = find(result.events, "ns", "ACTIVE");
    REQUIRE(active);
    CHECK(active->ts == secs(30.12));
    CHECK(std::count_if(result.events.begin(), result.events.end(),
                        [](const Event& e) { return e.entity_kind == "alarm" && e.event == "DELIVERED"; }) == 1);
    CHECK(std::count_if(result.events.begin(), result.events.end(),
                        [](const Event& e) { return e.entity_kind == "actuator" && e.event == "EXECUTE"; }) == 1);
    CHECK(sys.engine().ns(ns).state == NsState::TERMINATED);
    CHECK(sys.vim().vms().empty());
    CHECK(result.ended_at == secs(120));
}

TEST_CASE("simulate: measured setup times") {
    System sys(load_scenario(kScenarios / "setup-times.yaml"));
    run_simulation(sys, Timestamp::max());
    const std::map<std::size_t, double> expected{{1, 30.12}, {5, 33.49}, {10, 45.87}, {20, 60.19}, {30, 84.63}};
    int seen = 0;
    for (const auto& ns : sys.engine().list()) {
        REQUIRE(ns.state == NsState::ACTIVE);
        const double t = to_seconds(ns.state_changed_at);
        CHECK(std::abs(t - expected.at(ns.vnf_instances.size())) <= 1e-3);
        ++seen;
    }
    CHECK(seen == 5);
    CHECK(interference_free(sys.pool().slices(), sys.pool().config().reuse_distance_m));
}

TEST_CASE("simulate: campus repository swap") {
    System sys(load_scenario(kScenarios / "campus.yaml"));
    const auto result = run_simulation(sys, Timestamp::max());
    REQUIRE(result.swaps.size() == 1);
    const auto& r = result.swaps[0];
    CHECK(r.strategy == SwapStrategy::REPOSITORY);
    CHECK(r.selected_vwi == "campus-night");
    CHECK(r.downtime_s == 0.0);
    CHECK(sys.engine().ns(result.labels.at("campus")).state == NsState::TERMINATED);
    CHECK(sys.engine().ns(result.labels.at("night")).state == NsState::ACTIVE);
}

TEST_CASE("simulate: workload errors are logged, not thrown") {
    auto s = default_scenario();
    s.workload = nlohmann::json::parse(R"([{"at": 1, "action": "delete", "ns": "nobody"}])");
    System sys(s);
    const auto result = run_simulation(sys, secs(5));
    CHECK(find(result.events, "workload", "ERROR"));
    CHECK(result.ended_at == secs(5));
}

TEST_CASE("simulate: inline deploy and reconfigure") {
    auto s = relaxed_scenario();
    nlohmann::json w = nlohmann::json::array();
    w.push_back({{"at", 0}, {"action", "deploy"}, {"descriptor", nlohmann::json::parse(R"({
        "name": "inline",
        "networks": [{"role": "MANAGEMENT", "cidr": "10.0.0.0/24"}],
        "vnfs": [{"name": "enb", "image": "enb", "role": "ENODEB_TX", "flavor": {"vcpus": 2, "ram_mb": 2048},
                  "networks": ["MANAGEMENT"], "radio_requirements": {"bandwidth_hz": 1.4e6, "tx_power_dbm": 10}}]
    })")}, {"as", "x"}});
    w.push_back({{"at", 50}, {"action", "reconfigure"}, {"ns", "x"}, {"patch", {{"role_counts", {{"ENODEB_TX", 3}}}}}});
    s.workload = w;
    System sys(s);
    const auto result = run_simulation(sys, secs(200));
    CHECK(sys.engine().vnfs_of(result.labels.at("x")).size() == 3);
    CHECK(sys.engine().ns(result.labels.at("x")).state == NsState::ACTIVE);
}

TEST_CASE("simulation requires VIRTUAL time") {
    auto s = default_scenario();
    s.clock = ClockMode::REALTIME;
    System sys(s);
    CHECK_THROWS_AS(run_simulation(sys, secs(1)), Error);
}

TEST_CASE("determinism: same scenario, same event log") {
    auto run = [] {
        System sys(load_scenario(kScenarios / "default.yaml"));
        run_simulation(sys, Timestamp::max());
        return sys.events().render_text();
    };
    CHECK(run() == run());
}
