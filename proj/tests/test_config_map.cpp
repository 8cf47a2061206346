#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "edgeplan/config_map.hpp"
#include "support/oracle.hpp"

using namespace edgeplan;
using namespace testsupport;

TEST_CASE("reward follows the scoring rule exactly") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        double lat = uniform(rng, 0.1, 500.0);
        double acc = uniform(rng, 0.0, 1.0);
        double req = uniform(rng, 0.1, 500.0);
        auto rb = reward_from_latency(lat, acc, req);
        if (lat <= req) {
            double want = std::exp(acc) + 1000.0 / lat;
            CHECK(rb.feasible);
            CHECK_THAT(rb.reward, Catch::Matchers::WithinRel(want, 1e-12));
        } else {
            CHECK(!rb.feasible);
            CHECK(rb.reward == 0.0);
        }
        CHECK(rb.throughput_fps == 1000.0 / lat);
        CHECK(rb.latency_ms == lat);
        CHECK(rb.accuracy == acc);
    }
}

TEST_CASE("reward treats the deadline boundary as feasible") {
    auto rb = reward_from_latency(100.0, 0.5, 100.0);
    CHECK(rb.feasible);
    CHECK(rb.reward == std::exp(0.5) + 10.0);
    auto over = reward_from_latency(std::nextafter(100.0, 200.0), 0.5, 100.0);
    CHECK(!over.feasible);
    CHECK(over.reward == 0.0);
}

TEST_CASE("build_map entries are optimal under re-enumeration") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        auto inst = random_instance(rng);
        std::vector<double> states;
        for (int s = 0; s < 15; ++s) states.push_back(uniform(rng, 50.0, 5000.0));
        double req = uniform(rng, 20.0, 300.0);
        auto map = build_map(inst.model, inst.pred, states, req);
        REQUIRE(map.entries.size() == states.size());
        for (const auto& entry : map.entries) {
            double best_reward = 0.0;
            Strategy fastest{1, 0};
            double fastest_lat = std::numeric_limits<double>::infinity();
            for (int i = 1; i <= inst.model.exit_count(); ++i) {
                int n = static_cast<int>(inst.model.branch(i).layers.size());
                for (int p = 0; p <= n; ++p) {
                    double lat = oracle_latency(inst.model, inst.pred, i, p, entry.state_kbps);
                    if (lat <= req)
                        best_reward = std::max(best_reward,
                                               std::exp(inst.model.branch(i).accuracy) + 1000.0 / lat);
                    if (lat < fastest_lat) {
                        fastest_lat = lat;
                        fastest = Strategy{i, p};
                    }
                }
            }
            if (best_reward > 0.0) {
                CHECK(entry.feasible);
                CHECK_THAT(entry.reward, Catch::Matchers::WithinRel(best_reward, 1e-12));
            } else {
                CHECK(!entry.feasible);
                CHECK(entry.reward == 0.0);
                CHECK(entry.strategy == fastest);
            }
        }
    }
}

TEST_CASE("build_map picks the hand-computed winner on a one-layer model") {
    // One conv layer, 12500-byte input. Device runs it in 10 ms; offloading
    // costs 100000/B ms of uplink plus 1 ms on the edge.
    auto model = tiny_model(12500, 40);
    model.branches[0].layers.resize(1);
    validate_model(model);
    auto pred = tiny_predictor(1.0, 2.0, 10.0, 20.0);

    // slow link: 101 ms offloaded vs 10 ms on-device
    auto slow = build_map(model, pred, {1000.0}, 1000.0);
    CHECK(slow.entries[0].strategy == Strategy{1, 0});
    CHECK(slow.entries[0].reward == std::exp(0.9) + 100.0);
    CHECK(slow.entries[0].throughput_fps == 100.0);

    // fast link: 2 ms offloaded beats 10 ms on-device
    auto fast = build_map(model, pred, {100000.0}, 1000.0);
    CHECK(fast.entries[0].strategy == Strategy{1, 1});
    CHECK(fast.entries[0].reward == std::exp(0.9) + 500.0);

    // tight deadline rules out offloading on the slow link
    auto tight = build_map(model, pred, {1000.0}, 50.0);
    CHECK(tight.entries[0].strategy == Strategy{1, 0});
    CHECK(tight.entries[0].feasible);

    // impossible deadline: flagged, zero reward, fastest strategy kept
    auto never = build_map(model, pred, {1000.0}, 5.0);
    CHECK(!never.entries[0].feasible);
    CHECK(never.entries[0].reward == 0.0);
    CHECK(never.entries[0].strategy == Strategy{1, 0});
}

TEST_CASE("build_map breaks reward ties toward the later candidate") {
    // Two branches, identical layers and accuracy: every strategy of branch 1
    // is matched by branch 2, so the final enumerated candidate must win.
    auto model = tiny_model(0, 0);
    ExitBranch second = model.branches[0];
    second.exit_index = 2;
    model.branches.push_back(second);
    validate_model(model);
    auto pred = tiny_predictor(1.0, 1.0, 1.0, 1.0);
    auto map = build_map(model, pred, {1000.0}, 100.0);
    REQUIRE(map.entries.size() == 1);
    CHECK(map.entries[0].strategy.exit_point == 2);
    // all partitions tie at 2 ms; the enumeration ends at partition 2
    CHECK(map.entries[0].strategy.partition_point == 2);
}

TEST_CASE("build_map sorts and deduplicates states") {
    auto model = tiny_model(1000, 100);
    auto pred = tiny_predictor(1.0, 2.0, 10.0, 20.0);
    auto map = build_map(model, pred, {900.0, 300.0, 900.0, 600.0}, 1000.0);
    REQUIRE(map.entries.size() == 3);
    CHECK(map.entries[0].state_kbps == 300.0);
    CHECK(map.entries[1].state_kbps == 600.0);
    CHECK(map.entries[2].state_kbps == 900.0);
    CHECK_THROWS_AS(build_map(model, pred, {}, 100.0), validation_error);
    CHECK_THROWS_AS(build_map(model, pred, {0.0}, 100.0), validation_error);
    CHECK_THROWS_AS(build_map(model, pred, {100.0}, 0.0), validation_error);
}

TEST_CASE("lookup snaps to the nearest state, lower on ties") {
    auto model = tiny_model(1000, 100);
    auto pred = tiny_predictor(1.0, 2.0, 10.0, 20.0);
    auto map = build_map(model, pred, {100.0, 200.0, 400.0}, 1000.0);
    CHECK(lookup(map, 100.0).state_kbps == 100.0);
    CHECK(lookup(map, 149.0).state_kbps == 100.0);
    CHECK(lookup(map, 150.0).state_kbps == 100.0);  // tie -> lower state
    CHECK(lookup(map, 151.0).state_kbps == 200.0);
    CHECK(lookup(map, 300.0).state_kbps == 200.0);  // tie -> lower state
    CHECK(lookup(map, 301.0).state_kbps == 400.0);
    CHECK(lookup(map, 5.0).state_kbps == 100.0);    // clamped below
    CHECK(lookup(map, 9999.0).state_kbps == 400.0); // clamped above
}

TEST_CASE("map JSON round trip preserves entries") {
    auto model = tiny_model(12500, 1250);
    auto pred = tiny_predictor(1.0, 2.0, 10.0, 20.0);
    auto map = build_map(model, pred, {250.0, 1000.0, 4000.0}, 120.0);
    auto j = map_to_json(map);
    auto back = map_from_json(j);
    REQUIRE(back.entries.size() == map.entries.size());
    for (std::size_t i = 0; i < map.entries.size(); ++i) {
        CHECK(back.entries[i].state_kbps == map.entries[i].state_kbps);
        CHECK(back.entries[i].strategy == map.entries[i].strategy);
        CHECK(back.entries[i].reward == map.entries[i].reward);
        CHECK(back.entries[i].feasible == map.entries[i].feasible);
    }
    CHECK(map_to_json(back) == j);

    auto bad = j;
    std::swap(bad[0], bad[1]);  // states no longer increasing
    CHECK_THROWS_AS(map_from_json(bad), validation_error);
}
