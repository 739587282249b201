#include <doctest.h>

#include "properties.hpp"

using namespace oocran;
using namespace testsupport;

TEST_CASE("property: random engine sequences never put interfering slices on air") {
    for (std::uint32_t seed = 0; seed < 150; ++seed) {
        const auto r = random_sequence(seed);
        CAPTURE(r.failure);
        CHECK(r.interference_free);
    }
}

TEST_CASE("property: random engine sequences release everything they took") {
    for (std::uint32_t seed = 1000; seed < 1150; ++seed) {
        const auto r = random_sequence(seed);
        CAPTURE(r.failure);
        CHECK(r.leak_free);
    }
}

TEST_CASE("property: NS histories are walks in the transition graph") {
    for (std::uint32_t seed = 0; seed < 30; ++seed) {
        System sys(crowded_scenario());
        auto& e = sys.engine();
        std::mt19937 rng(seed);
        std::vector<NsId> ids;
        for (int i = 0; i < 6; ++i) {
            try {
                ids.push_back(e.create_ns(enodebs(1 + static_cast<int>(rng() % 5), "h" + std::to_string(i))).id);
                if (rng() % 2) settle(e);
                if (rng() % 3 == 0) e.delete_ns(ids.back());
            } catch (const Error&) {
            }
        }
        settle(e);
        for (const auto& ns : e.list()) {
            CHECK(history_is_walk(ns));
            if (ns.state == NsState::TERMINATED) {
                CHECK(ns.vnf_instances.empty());
                CHECK(ns.slices.empty());
                CHECK(ns.networks.empty());
            }
        }
    }
}

TEST_CASE("the generator reaches the interesting states") {
    int active = 0;
    int failed = 0;
    int rejected = 0;
    for (std::uint32_t seed = 0; seed < 150; ++seed) {
        const auto r = random_sequence(seed);
        active += r.reached_active;
        failed += r.failed;
        rejected += r.rejected;
    }
    CHECK(active > 150);
    CHECK(failed > 0);
    CHECK(rejected > 0);
}

TEST_CASE("property: same seed, same outcome") {
    for (std::uint32_t seed : {3u, 77u, 901u}) {
        const auto a = random_sequence(seed);
        const auto b = random_sequence(seed);
        CHECK(a.ops == b.ops);
        CHECK(a.failure == b.failure);
    }
}
