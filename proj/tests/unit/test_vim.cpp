#include <doctest.h>

#include <random>
#include <set>
#include <thread>

#include "support.hpp"

using namespace oocran;
using namespace testsupport;

namespace {

void two_hosts(Vim& vim) {
    vim.add_host(24, 65536);
    vim.add_host(24, 65536);
}

}  // namespace

TEST_CASE("create_network addressing") {
    Vim vim;
    SUBCASE("/24 gateway and cursor") {
        const auto n = vim.create_network(NetworkRole::MANAGEMENT, "10.0.0.0/24");
        CHECK(format_ipv4(n.gateway()) == "10.0.0.1");
        REQUIRE(n.next_ip_cursor());
        CHECK(format_ipv4(*n.next_ip_cursor()) == "10.0.0.2");
    }
    SUBCASE("/30 has exactly one assignable address") {
        const auto n = vim.create_network(NetworkRole::DATAFLOW, "10.0.1.0/30");
        CHECK(n.assignable_count() == 1);
        vim.add_host(24, 65536);
        const auto vm = vim.create_vm({1, 512}, {n.id}, 1.0);
        CHECK(vm.nics.at(0).ip == "10.0.1.2");
        CHECK_THROWS_AS(vim.create_vm({1, 512}, {n.id}, 1.0), Error);
    }
    SUBCASE("/31 is rejected") {
        try {
            vim.create_network(NetworkRole::DATAFLOW, "10.0.1.0/31");
            FAIL("expected InvalidCidr");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidCidr);
        }
    }
    SUBCASE("malformed prefixes") {
        CHECK_THROWS_AS(vim.create_network(NetworkRole::DATAFLOW, "10.0.1.0"), Error);
        CHECK_THROWS_AS(vim.create_network(NetworkRole::DATAFLOW, "10.0.300.0/24"), Error);
        CHECK_THROWS_AS(vim.create_network(NetworkRole::DATAFLOW, "10.0.1.0/33"), Error);
    }
}

TEST_CASE("first-fit placement") {
    Vim vim;
    two_hosts(vim);
    SUBCASE("empty cluster places on host 0") {
        CHECK(vim.create_vm({2, 2048}, {}, 1.0).host_id == HostId{0});
    }
    SUBCASE("25 VMs of 2 vCPUs on two 24-vCPU hosts") {
        // Hand replay of first-fit: 12 fill host 0, 12 fill host 1, the 25th
        // has RAM to spare but no vCPU anywhere.
        std::map<HostId, int> per_host;
        for (int i = 0; i < 24; ++i) ++per_host[vim.create_vm({2, 2048}, {}, 1.0).host_id];
        CHECK(per_host[HostId{0}] == 12);
        CHECK(per_host[HostId{1}] == 12);
        try {
            vim.create_vm({2, 2048}, {}, 1.0);
            FAIL("expected CapacityExhausted");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::CapacityExhausted);
        }
    }
    SUBCASE("oversized flavor") {
        CHECK_THROWS_AS(vim.create_vm({999, 1}, {}, 1.0), Error);
    }
    SUBCASE("unknown network") {
        try {
            vim.create_vm({1, 1}, {NetworkId{42}}, 1.0);
            FAIL("expected UnknownNetwork");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownNetwork);
        }
    }
}

TEST_CASE("delete_vm conservation and address reuse") {
    Vim vim;
    two_hosts(vim);
    const auto net = vim.create_network(NetworkRole::MANAGEMENT, "10.0.0.0/24");
    const auto before = vim.resource_snapshot();
    SUBCASE("create then delete restores counters") {
        const auto vm = vim.create_vm({4, 4096}, {net.id}, 1.0);
        vim.delete_vm(vm.id);
        CHECK(vim.resource_snapshot() == before);
    }
    SUBCASE("delete twice") {
        const auto vm = vim.create_vm({4, 4096}, {net.id}, 1.0);
        vim.delete_vm(vm.id);
        try {
            vim.delete_vm(vm.id);
            FAIL("expected UnknownVm");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::UnknownVm);
        }
    }
    SUBCASE("released middle address is reused") {
        const auto a = vim.create_vm({1, 512}, {net.id}, 1.0);
        const auto b = vim.create_vm({1, 512}, {net.id}, 1.0);
        const auto c = vim.create_vm({1, 512}, {net.id}, 1.0);
        CHECK(a.nics[0].ip == "10.0.0.2");
        CHECK(b.nics[0].ip == "10.0.0.3");
        CHECK(c.nics[0].ip == "10.0.0.4");
        vim.delete_vm(b.id);
        CHECK(vim.create_vm({1, 512}, {net.id}, 1.0).nics[0].ip == "10.0.0.3");
    }
    SUBCASE("network in use cannot be deleted") {
        vim.create_vm({1, 512}, {net.id}, 1.0);
        CHECK_THROWS_AS(vim.delete_network(net.id), Error);
    }
}

TEST_CASE("virtual clock") {
    Vim vim;
    two_hosts(vim);
    SUBCASE("dt=0 is a no-op") {
        vim.create_vm({1, 1}, {}, 5.0);
        CHECK(vim.advance_clock(0.0).empty());
        CHECK(vim.now() == Timestamp{0});
    }
    SUBCASE("30.12 s boot flips after exactly 30.12 s") {
        const auto vm = vim.create_vm({1, 1}, {}, 30.12);
        CHECK(vim.advance_clock(30.11).empty());
        const auto events = vim.advance_clock(0.01);
        REQUIRE(events.size() == 1);
        CHECK(events[0].vm == vm.id);
        CHECK(events[0].at == secs(30.12));
        CHECK(vim.vm(vm.id).state == VmState::RUNNING);
    }
    SUBCASE("threshold semantics") {
        vim.create_vm({1, 1}, {}, 5.0);
        vim.create_vm({1, 1}, {}, 10.0);
        CHECK(vim.advance_clock(7.0).size() == 1);
    }
    SUBCASE("deadline order with ties by id") {
        const auto a = vim.create_vm({1, 1}, {}, 3.0);
        const auto b = vim.create_vm({1, 1}, {}, 1.0);
        const auto c = vim.create_vm({1, 1}, {}, 3.0);
        const auto events = vim.advance_clock(10.0);
        REQUIRE(events.size() == 3);
        CHECK(events[0].vm == b.id);
        CHECK(events[1].vm == a.id);
        CHECK(events[2].vm == c.id);
    }
    SUBCASE("negative step") {
        CHECK_THROWS_AS(vim.advance_clock(-1.0), Error);
    }
}

TEST_CASE("REALTIME clock refuses advance") {
    Vim vim(ClockMode::REALTIME);
    try {
        vim.advance_clock(1.0);
        FAIL("expected WrongClockMode");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WrongClockMode);
    }
    vim.add_host(4, 4096);
    vim.create_vm({1, 1}, {}, 0.001);
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    CHECK(vim.poll().size() == 1);
}

TEST_CASE("RRH exclusivity") {
    Vim vim;
    const auto r = vim.add_rrh({0, 0}, 20e6, 20.0);
    vim.attach_rrh(r, VnfId{1});
    try {
        vim.attach_rrh(r, VnfId{2});
        FAIL("expected RrhBusy");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RrhBusy);
    }
    CHECK_FALSE(vim.find_free_rrh(1.4e6, 10.0));
    vim.detach_rrh(r);
    CHECK(vim.find_free_rrh(1.4e6, 10.0) == r);
    CHECK_FALSE(vim.find_free_rrh(1.4e6, 30.0));  // above the RRH's power limit
    CHECK_THROWS_AS(vim.attach_rrh(RrhId{9}, VnfId{1}), Error);
}

TEST_CASE("property: address uniqueness and conservation under random create/delete") {
    std::mt19937 rng(7);
    for (int round = 0; round < 50; ++round) {
        Vim vim;
        two_hosts(vim);
        const auto mgmt = vim.create_network(NetworkRole::MANAGEMENT, "10.0.0.0/28");
        const auto data = vim.create_network(NetworkRole::DATAFLOW, "10.0.1.0/29");
        const auto initial = vim.resource_snapshot();
        std::vector<VmId> live;
        for (int op = 0; op < 60; ++op) {
            if (!live.empty() && rng() % 3 == 0) {
                const auto i = rng() % live.size();
                vim.delete_vm(live[i]);
                live.erase(live.begin() + static_cast<long>(i));
            } else {
                try {
                    const int vcpus = 1 + static_cast<int>(rng() % 4);
                    std::vector<NetworkId> nets{mgmt.id};
                    if (rng() % 2) nets.push_back(data.id);
                    live.push_back(vim.create_vm({vcpus, 1024}, nets, 1.0).id);
                } catch (const Error& e) {
                    CHECK((e.code() == ErrorCode::CapacityExhausted || e.code() == ErrorCode::InvalidCidr));
                }
            }
            // total = free + allocated, and no address repeats within a network
            std::map<HostId, int> used;
            std::map<NetworkId, std::set<std::string>> seen;
            for (const auto& vm : vim.vms()) {
                used[vm.host_id] += vm.flavor.vcpus;
                for (const auto& nic : vm.nics) {
                    CHECK(seen[nic.network].insert(nic.ip).second);
                    CHECK(nic.ip != format_ipv4(vim.network(nic.network).gateway()));
                }
            }
            for (const auto& h : vim.hosts()) CHECK(h.vcpus_free + used[h.id] == h.vcpus_total);
        }
        for (auto id : live) vim.delete_vm(id);
        CHECK(vim.resource_snapshot() == initial);
    }
}

TEST_CASE("determinism: identical sequences give identical states") {
    auto run = [] {
        Vim vim;
        two_hosts(vim);
        const auto n = vim.create_network(NetworkRole::MANAGEMENT, "10.0.0.0/24");
        for (int i = 0; i < 8; ++i) vim.create_vm({2, 1024}, {n.id}, 1.0 + i % 3);
        std::vector<VmEvent> all = vim.advance_clock(2.0);
        auto rest = vim.advance_clock(5.0);
        all.insert(all.end(), rest.begin(), rest.end());
        std::string trace;
        for (const auto& e : all) trace += e.vm.str() + "@" + std::to_string(e.at.count()) + ";";
        return trace + vim.resource_snapshot().dump();
    };
    CHECK(run() == run());
}
