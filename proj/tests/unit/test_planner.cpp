#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace oocran;
using namespace testsupport;

// From tests/oracles/numeric_oracles.py.
namespace oracle {
constexpr double kArea30 = 2827.43338823;
constexpr double kLinear21 = 65.51255588;
}  // namespace oracle

namespace {

VwiDescriptor vwi(std::string name, double area, double radius = 30.0) {
    VwiDescriptor d;
    d.name = std::move(name);
    d.target_area_m2 = area;
    d.cell_radius_m = radius;
    return d;
}

VwiDescriptor cells(int n, std::string name = "cells") { return vwi(std::move(name), n * oracle::kArea30); }

}  // namespace

TEST_CASE("campus plan") {
    const auto plan = plan_vwi(vwi("campus", 58241.0), TimeModel::measured_table());
    CHECK(plan.n_enodebs == 21);
    CHECK(plan.covered_area_m2 == doctest::Approx(21 * oracle::kArea30));
    CHECK(plan.covered_area_m2 >= 58241.0);
    CHECK(plan.placements.size() == 21);
    CHECK(plan.linear_estimate_s == doctest::Approx(oracle::kLinear21).epsilon(1e-8));
    CHECK(plan.linear_estimate_s >= 55.0);
    CHECK(plan.linear_estimate_s <= 75.0);
    const auto lin = plan_vwi(vwi("campus", 58241.0), TimeModel::fitted_linear());
    CHECK(lin.estimated_setup_s == doctest::Approx(oracle::kLinear21).epsilon(1e-8));
}

TEST_CASE("plan edge cases") {
    const auto tm = TimeModel::measured_table();
    SUBCASE("area equal to one cell needs exactly one") {
        CHECK(plan_vwi(vwi("one", oracle::kArea30), tm).n_enodebs == 1);
    }
    SUBCASE("a sliver more needs two") {
        CHECK(plan_vwi(vwi("two", oracle::kArea30 * 1.0001), tm).n_enodebs == 2);
    }
    SUBCASE("non-positive inputs") {
        try {
            plan_vwi(vwi("zero", 0.0), tm);
            FAIL("expected DomainError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DomainError);
        }
        CHECK_THROWS_AS(plan_vwi(vwi("neg", 100.0, -1.0), tm), Error);
    }
    SUBCASE("polygon overrides target area") {
        auto d = vwi("square", 1.0);
        d.region = {{0, 0}, {100, 0}, {100, 100}, {0, 100}};
        CHECK(polygon_area(d.region) == doctest::Approx(10000.0));
        const auto plan = plan_vwi(d, tm);
        CHECK(plan.n_enodebs == static_cast<int>(std::ceil(10000.0 / oracle::kArea30)));
    }
}

TEST_CASE("property: coverage and placement spacing") {
    const auto tm = TimeModel::measured_table();
    for (double r : {10.0, 30.0, 55.0}) {
        for (double area = 500.0; area < 200000.0; area *= 1.7) {
            const auto plan = plan_vwi(vwi("p", area, r), tm);
            const double per_cell = M_PI * r * r;
            CHECK(plan.covered_area_m2 >= area);
            CHECK(plan.covered_area_m2 - area < per_cell + 1e-6);
            REQUIRE(plan.placements.size() == static_cast<std::size_t>(plan.n_enodebs));
            for (std::size_t i = 0; i < plan.placements.size(); ++i) {
                for (std::size_t j = i + 1; j < plan.placements.size(); ++j) {
                    const auto& a = plan.placements[i];
                    const auto& b = plan.placements[j];
                    CHECK(std::hypot(a.x - b.x, a.y - b.y) >= r - 1e-9);
                }
            }
        }
    }
}

TEST_CASE("descriptor generation") {
    const auto plan = plan_vwi(cells(3), TimeModel::measured_table());
    const auto d = vwi_to_ns_descriptor(cells(3), plan);
    CHECK(d.vnfs.size() == 3);
    CHECK(validate_descriptor(d).empty());
    for (const auto& v : d.vnfs) {
        CHECK(v.role == VnfRole::ENODEB_TX);
        REQUIRE(v.radio_requirements);
        CHECK(v.radio_requirements->bandwidth_hz == 1.4e6);
    }
}

TEST_CASE("repository selection") {
    VwiRepository repo;
    SUBCASE("empty") {
        try {
            repo.select({{"users", 10}});
            FAIL("expected EmptyRepository");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyRepository);
        }
    }
    auto day = cells(20, "day");
    day.traffic_profile = {{"users", 900}, {"hour", 14}};
    auto night = cells(5, "night");
    night.traffic_profile = {{"users", 50}, {"hour", 2}};
    repo.put(day);
    repo.put(night);
    SUBCASE("nearest profile") {
        CHECK(repo.select({{"users", 80}, {"hour", 3}}).name == "night");
        CHECK(repo.select({{"users", 700}, {"hour", 12}}).name == "day");
    }
    SUBCASE("tie goes to the earliest entry") {
        CHECK(repo.select({{"users", 475}, {"hour", 8}}).name == "day");
    }
    SUBCASE("normalization stops one field dominating") {
        // Raw distance would pick day on users alone; normalized, hour decides.
        CHECK(repo.select({{"users", 520}, {"hour", 2}}).name == "night");
    }
}

TEST_CASE("swap strategies") {
    System sys(relaxed_scenario());
    auto& e = sys.engine();
    auto& planner = sys.planner();
    const auto old = e.create_ns(planner.to_ns(cells(10, "ten")));
    settle(e);
    REQUIRE(e.ns(old.id).state == NsState::ACTIVE);

    SUBCASE("HARD: downtime is the new VWI setup time") {
        const auto r = planner.swap(e, old.id, cells(20, "twenty"), SwapStrategy::HARD);
        CHECK(r.new_enodebs == 20);
        CHECK(r.downtime_s == doctest::Approx(60.19).epsilon(1e-9));
        CHECK(e.ns(old.id).state == NsState::TERMINATED);
        CHECK(e.ns(r.new_ns).state == NsState::ACTIVE);
        CHECK(r.peak_vm_count == 20);
    }
    SUBCASE("SOFT_HANDOVER: no downtime, both footprints at once") {
        const auto r = planner.swap(e, old.id, cells(20, "twenty"), SwapStrategy::SOFT_HANDOVER);
        CHECK(r.downtime_s == 0.0);
        CHECK(r.peak_vm_count == 30);
        CHECK(r.peak_vm_count == r.old_vm_count + r.new_vm_count);
        CHECK(e.ns(old.id).state == NsState::TERMINATED);
        CHECK(sys.pool().size() == 20);
        CHECK(interference_free(sys.pool().slices(), sys.pool().config().reuse_distance_m));
    }
    SUBCASE("REPOSITORY picks the nearest stored design") {
        auto small = cells(4, "quiet");
        small.traffic_profile = {{"users", 10}};
        auto big = cells(12, "busy");
        big.traffic_profile = {{"users", 1000}};
        planner.repository().put(small);
        planner.repository().put(big);
        VwiDescriptor demand;
        demand.traffic_profile = {{"users", 30}};
        const auto r = planner.swap(e, old.id, demand, SwapStrategy::REPOSITORY);
        CHECK(r.selected_vwi == "quiet");
        CHECK(r.new_enodebs == 4);
        CHECK(r.downtime_s == 0.0);
    }
    SUBCASE("REPOSITORY with nothing stored") {
        try {
            planner.swap(e, old.id, {}, SwapStrategy::REPOSITORY);
            FAIL("expected EmptyRepository");
        } catch (const Error& err) {
            CHECK(err.code() == ErrorCode::EmptyRepository);
        }
        CHECK(e.ns(old.id).state == NsState::ACTIVE);
    }
}

TEST_CASE("soft handover needs room for both") {
    System sys(relaxed_scenario(25));
    auto& e = sys.engine();
    const auto old = e.create_ns(sys.planner().to_ns(cells(10)));
    settle(e);
    const auto before = sys.resource_snapshot();
    try {
        sys.planner().swap(e, old.id, cells(20), SwapStrategy::SOFT_HANDOVER);
        FAIL("expected InsufficientCapacity");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::InsufficientCapacity);
    }
    CHECK(e.ns(old.id).state == NsState::ACTIVE);
    CHECK(sys.resource_snapshot() == before);
    // HARD frees the old cells first, so it fits.
    CHECK(sys.planner().swap(e, old.id, cells(20), SwapStrategy::HARD).new_enodebs == 20);
}

TEST_CASE("minimum swap interval") {
    auto s = relaxed_scenario();
    s.planner.min_swap_interval_s = 600.0;
    System sys(s);
    auto& e = sys.engine();
    const auto first = e.create_ns(sys.planner().to_ns(cells(2)));
    settle(e);
    const auto r = sys.planner().swap(e, first.id, cells(3), SwapStrategy::SOFT_HANDOVER);
    try {
        sys.planner().swap(e, r.new_ns, cells(4), SwapStrategy::SOFT_HANDOVER);
        FAIL("expected SwapTooSoon");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::SwapTooSoon);
    }
    e.advance_to(e.vim().now() + secs(600));
    CHECK_NOTHROW(sys.planner().swap(e, r.new_ns, cells(4), SwapStrategy::SOFT_HANDOVER));
}

TEST_CASE("swap of a non-ACTIVE NS") {
    System sys(relaxed_scenario());
    const auto ns = sys.engine().create_ns(enodebs(2));
    CHECK_THROWS_AS(sys.planner().swap(sys.engine(), ns.id, cells(2), SwapStrategy::HARD), Error);
}

TEST_CASE("strategy names") {
    CHECK(parse_swap_strategy("SOFT_HANDOVER") == SwapStrategy::SOFT_HANDOVER);
    CHECK(to_string(SwapStrategy::REPOSITORY) == "REPOSITORY");
    CHECK_THROWS_AS(parse_swap_strategy("GENTLE"), Error);
}
