#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oocran/serialization.hpp"
#include "support.hpp"

using namespace oocran;
using namespace testsupport;

namespace {

bool reports(const std::vector<Violation>& vs, const std::string& needle) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.invariant.find(needle) != std::string::npos; });
}

// Declared NS edges written out independently of the implementation.
const std::map<NsState, std::set<NsState>> kGraph{
    {NsState::PENDING, {NsState::DEPLOYING}},
    {NsState::DEPLOYING, {NsState::ACTIVE, NsState::FAILED}},
    {NsState::ACTIVE, {NsState::RECONFIGURING, NsState::TERMINATING}},
    {NsState::RECONFIGURING, {NsState::ACTIVE, NsState::FAILED}},
    {NsState::TERMINATING, {NsState::TERMINATED}},
    {NsState::TERMINATED, {}},
    {NsState::FAILED, {NsState::TERMINATING}},
};

const std::vector<NsState> kAll{NsState::PENDING,     NsState::DEPLOYING,  NsState::ACTIVE, NsState::RECONFIGURING,
                                NsState::TERMINATING, NsState::TERMINATED, NsState::FAILED};

}  // namespace

TEST_CASE("downlink descriptor validates cleanly") {
    CHECK(validate_descriptor(downlink()).empty());
}

TEST_CASE("two MANAGEMENT networks are reported") {
    auto d = downlink();
    d.networks.push_back({NetworkRole::MANAGEMENT, "10.0.2.0/24"});
    const auto vs = validate_descriptor(d);
    REQUIRE(reports(vs, "exactly one MANAGEMENT network"));
    CHECK(std::any_of(vs.begin(), vs.end(), [](const Violation& v) { return v.field == "networks"; }));
}

TEST_CASE("validation rules") {
    SUBCASE("eNodeB without radio requirements") {
        auto d = downlink();
        d.vnfs[1].radio_requirements.reset();
        const auto vs = validate_descriptor(d);
        CHECK(reports(vs, "radio_requirements"));
        CHECK(vs.front().field.find("vnfs[1]") != std::string::npos);
    }
    SUBCASE("two DATAFLOW networks") {
        auto d = downlink();
        d.networks.push_back({NetworkRole::DATAFLOW, "10.0.2.0/24"});
        CHECK(reports(validate_descriptor(d), "at most one DATAFLOW network"));
    }
    SUBCASE("VNF off the management network") {
        auto d = downlink();
        d.vnfs[0].networks = {NetworkRole::DATAFLOW};
        CHECK(reports(validate_descriptor(d), "MANAGEMENT"));
    }
    SUBCASE("duplicate alarm ids") {
        auto d = downlink();
        d.actuator_bindings.push_back({"cpu_load", "other"});
        CHECK_FALSE(validate_descriptor(d).empty());
    }
    SUBCASE("empty vnfs") {
        auto d = downlink();
        d.vnfs.clear();
        CHECK_FALSE(validate_descriptor(d).empty());
    }
    SUBCASE("non-positive flavor") {
        auto d = downlink();
        d.vnfs[0].flavor.vcpus = 0;
        CHECK_FALSE(validate_descriptor(d).empty());
    }
}

TEST_CASE("validation is deterministic and idempotent") {
    auto d = downlink();
    d.networks.push_back({NetworkRole::MANAGEMENT, "10.9.0.0/24"});
    d.vnfs[1].radio_requirements.reset();
    const auto first = validate_descriptor(d);
    CHECK(first == validate_descriptor(d));
    CHECK(first.size() >= 2);
}

TEST_CASE("edge table matches the declared graph") {
    for (auto from : kAll) {
        for (auto to : kAll) {
            CHECK_MESSAGE(is_ns_edge(from, to) == (kGraph.at(from).count(to) == 1),
                          to_string(from), " -> ", to_string(to));
        }
    }
}

TEST_CASE("transition") {
    NetworkService ns;
    SUBCASE("PENDING to DEPLOYING") {
        const auto next = transition(ns, NsState::DEPLOYING, secs(1));
        CHECK(next.state == NsState::DEPLOYING);
        CHECK(next.state_changed_at == secs(1));
        CHECK(ns.state == NsState::PENDING);  // value semantics
        REQUIRE(next.history.size() == 1);
    }
    SUBCASE("TERMINATED to ACTIVE is illegal and names both states") {
        ns.state = NsState::TERMINATED;
        try {
            transition(ns, NsState::ACTIVE, secs(0));
            FAIL("expected IllegalTransition");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IllegalTransition);
            CHECK(std::string(e.what()).find("TERMINATED") != std::string::npos);
            CHECK(std::string(e.what()).find("ACTIVE") != std::string::npos);
        }
    }
    SUBCASE("full lifecycle records four events in order") {
        const std::vector<NsState> path{NsState::DEPLOYING, NsState::ACTIVE, NsState::TERMINATING, NsState::TERMINATED};
        for (std::size_t i = 0; i < path.size(); ++i) ns = transition(ns, path[i], secs(static_cast<double>(i)));
        REQUIRE(ns.history.size() == 4);
        NsState prev = NsState::PENDING;
        for (std::size_t i = 0; i < path.size(); ++i) {
            CHECK(ns.history[i].from == prev);
            CHECK(ns.history[i].to == path[i]);
            prev = path[i];
        }
        CHECK(history_is_walk(ns));
    }
}

TEST_CASE("every graph path up to length 6 replays as a walk") {
    // Reachability oracle: enumerate all paths from PENDING by DFS.
    std::vector<std::vector<NsState>> paths{{}};
    std::size_t checked = 0;
    while (!paths.empty()) {
        auto p = paths.back();
        paths.pop_back();
        NetworkService ns;
        for (std::size_t i = 0; i < p.size(); ++i) ns = transition(ns, p[i], secs(static_cast<double>(i)));
        CHECK(history_is_walk(ns));
        CHECK(ns.history.size() == p.size());
        ++checked;
        if (p.size() == 6) continue;
        for (auto next : kGraph.at(ns.state)) {
            auto q = p;
            q.push_back(next);
            paths.push_back(q);
        }
    }
    CHECK(checked > 10);
}

TEST_CASE("VNF edges") {
    CHECK(is_vnf_edge(VnfState::BOOTING, VnfState::RUNNING));
    CHECK(is_vnf_edge(VnfState::RUNNING, VnfState::RECONFIGURING));
    CHECK(is_vnf_edge(VnfState::RECONFIGURING, VnfState::RUNNING));
    CHECK(is_vnf_edge(VnfState::RUNNING, VnfState::STOPPED));
    CHECK_FALSE(is_vnf_edge(VnfState::STOPPED, VnfState::RUNNING));
}

TEST_CASE("descriptor JSON round trip is lossless") {
    const auto d = downlink();
    const nlohmann::json j = d;
    CHECK(j.get<NsDescriptor>() == d);
    CHECK(nlohmann::json(j.get<NsDescriptor>()) == j);
}

TEST_CASE("structured text round trip") {
    const auto d = downlink();
    const auto text = to_structured_text(nlohmann::json(d));
    CHECK(parse_structured_text(text).get<NsDescriptor>() == d);
    SUBCASE("numeric-looking strings stay strings") {
        nlohmann::json j{{"name", "123"}, {"flag", "true"}, {"n", 5}, {"x", 1.5}, {"ok", false}};
        CHECK(parse_structured_text(to_structured_text(j)) == j);
    }
    SUBCASE("malformed text") {
        CHECK_THROWS_AS(parse_structured_text("a: [1, 2"), Error);
    }
}

TEST_CASE("descriptor file from the scenarios directory") {
    const auto d = load_descriptor(std::string(OOCRAN_SOURCE_DIR) + "/scenarios/downlink.oocran");
    CHECK(d.name == "lte-downlink");
    CHECK(d.vnfs.size() == 2);
    CHECK(validate_descriptor(d).empty());
}

TEST_CASE("ids") {
    CHECK(VmId{3}.str() == "vm-3");
    CHECK(NsId::parse("ns-12") == NsId{12});
    CHECK_THROWS_AS(NsId::parse("vm-1"), Error);
    CHECK_THROWS_AS(NsId::parse("ns-"), Error);
    CHECK_THROWS_AS(NsId::parse("ns-1x"), Error);
}

TEST_CASE("enum names round trip") {
    for (auto s : kAll) CHECK(parse_ns_state(to_string(s)) == s);
    CHECK(parse_vnf_role("SPECTRUM_ANALYZER") == VnfRole::SPECTRUM_ANALYZER);
    CHECK(parse_actuator_action("REDEPLOY_VWI") == ActuatorAction::REDEPLOY_VWI);
    CHECK_THROWS_AS(parse_vnf_role("ENB"), Error);
}
