#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "edgeplan/online.hpp"

using namespace edgeplan;

namespace {

ConfigurationMap two_state_map() {
    ConfigurationMap map;
    map.latency_requirement_ms = 200.0;
    MapEntry low;
    low.state_kbps = 500.0;
    low.strategy = {5, 0};
    low.feasible = true;
    MapEntry high;
    high.state_kbps = 3000.0;
    high.strategy = {5, 22};
    high.feasible = true;
    map.entries = {low, high};
    return map;
}

}  // namespace

TEST_CASE("empty maps are rejected") {
    CHECK_THROWS_AS(OnlineOptimizer(ConfigurationMap{}), validation_error);
}

TEST_CASE("first sample adopts a strategy") {
    OnlineOptimizer opt(two_state_map());
    auto step = opt.step(480.0);
    CHECK(step.switched);
    CHECK(!step.state_changed);
    CHECK((step.strategy == Strategy{5, 0}));
    CHECK((opt.current_strategy() == Strategy{5, 0}));
    CHECK(opt.last_state_kbps() == 480.0);
}

TEST_CASE("accessors refuse before the first sample") {
    OnlineOptimizer opt(two_state_map());
    CHECK_THROWS_AS(opt.current_strategy(), validation_error);
    CHECK_THROWS_AS(opt.last_state_kbps(), validation_error);
}

TEST_CASE("strategy is held until the detector declares a transition") {
    std::mt19937_64 rng(404);
    std::normal_distribution<double> low(500.0, 30.0), high(3000.0, 100.0);
    OnlineOptimizer opt(two_state_map());

    int switches = 0;
    for (int i = 0; i < 60; ++i) {
        auto step = opt.step(low(rng));
        if (step.switched) ++switches;
        CHECK((step.strategy == Strategy{5, 0}));
    }
    CHECK(switches == 1);  // only the initial adoption

    int late_switches = 0;
    for (int i = 0; i < 60; ++i) {
        auto step = opt.step(high(rng));
        if (step.switched) ++late_switches;
    }
    CHECK(late_switches == 1);
    CHECK((opt.current_strategy() == Strategy{5, 22}));
}

TEST_CASE("a declared transition relooks up even if the strategy is unchanged") {
    // Both map states share one strategy: a switch still re-adopts it.
    auto map = two_state_map();
    map.entries[1].strategy = map.entries[0].strategy;
    OnlineOptimizer opt(map);
    std::mt19937_64 rng(405);
    std::normal_distribution<double> low(500.0, 30.0), high(3000.0, 100.0);
    for (int i = 0; i < 40; ++i) opt.step(low(rng));
    bool saw_transition = false;
    for (int i = 0; i < 40; ++i) {
        auto step = opt.step(high(rng));
        if (step.state_changed) {
            saw_transition = true;
            CHECK(step.switched);
            CHECK(step.strategy == map.entries[0].strategy);
        }
    }
    CHECK(saw_transition);
}
