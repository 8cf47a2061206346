#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "edgeplan/bocpd.hpp"

using namespace edgeplan;

namespace {

std::vector<double> gaussian_block(std::mt19937_64& rng, int n, double mean, double sd) {
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(dist(rng));
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    DetectorConfig cfg;
    cfg.hazard_lambda = 1.0;
    CHECK_THROWS_AS(ChangepointDetector(cfg), validation_error);
    cfg = {};
    cfg.map_drop_threshold = 1.0;
    CHECK_THROWS_AS(ChangepointDetector(cfg), validation_error);
    cfg = {};
    cfg.max_hypotheses = 0;
    CHECK_THROWS_AS(ChangepointDetector(cfg), validation_error);
    cfg = {};
    cfg.prior.beta0 = 0.0;
    CHECK_THROWS_AS(ChangepointDetector(cfg), validation_error);
}

TEST_CASE("map run length grows on constant input") {
    ChangepointDetector det;
    for (int i = 1; i <= 5; ++i) {
        auto obs = det.observe(800.0);
        CHECK(obs.map_run_length == i);
        CHECK(!obs.changed);
        CHECK_THAT(obs.posterior_mass, Catch::Matchers::WithinAbs(1.0, 1e-9));
        CHECK(obs.state_kbps == 800.0);
    }
    CHECK(det.hypothesis_count() == 6);
}

TEST_CASE("a level shift triggers exactly one prompt change") {
    std::mt19937_64 rng(1001);
    auto samples = gaussian_block(rng, 100, 1000.0, 50.0);
    auto jump = gaussian_block(rng, 100, 5000.0, 50.0);
    samples.insert(samples.end(), jump.begin(), jump.end());

    ChangepointDetector det;
    std::vector<int> change_indices;  // 1-based observation index
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto obs = det.observe(samples[i]);
        if (obs.changed) {
            change_indices.push_back(static_cast<int>(i) + 1);
            // segment statistics restart at the triggering sample
            CHECK(obs.state_kbps == samples[i]);
        }
    }
    REQUIRE(change_indices.size() == 1);
    CHECK(change_indices[0] > 100);
    CHECK(change_indices[0] <= 110);
}

TEST_CASE("stationary input declares no changes") {
    std::mt19937_64 rng(2002);
    auto samples = gaussian_block(rng, 1000, 1200.0, 5.0);  // level + small jitter
    ChangepointDetector det;
    int changes = 0;
    for (double s : samples) {
        auto obs = det.observe(s);
        if (obs.changed) ++changes;
        CHECK_THAT(obs.posterior_mass, Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
    CHECK(changes == 0);
    CHECK(det.hypothesis_count() == 500);  // truncated to the configured cap
}

TEST_CASE("truncation does not move change indices on the step fixture") {
    std::mt19937_64 rng(1001);
    auto samples = gaussian_block(rng, 100, 1000.0, 50.0);
    auto jump = gaussian_block(rng, 100, 5000.0, 50.0);
    samples.insert(samples.end(), jump.begin(), jump.end());

    DetectorConfig wide;
    wide.max_hypotheses = 4000;  // cap above the stream length: no pruning
    ChangepointDetector truncated, full(wide);
    std::vector<int> ti, fi;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (truncated.observe(samples[i]).changed) ti.push_back(static_cast<int>(i));
        if (full.observe(samples[i]).changed) fi.push_back(static_cast<int>(i));
    }
    CHECK(ti == fi);
    CHECK(!ti.empty());
}

TEST_CASE("state tracks the running segment mean") {
    ChangepointDetector det;
    det.observe(100.0);
    det.observe(200.0);
    auto obs = det.observe(300.0);
    CHECK(obs.state_kbps == 200.0);
}

TEST_CASE("detector is deterministic") {
    std::mt19937_64 rng(3003);
    auto samples = gaussian_block(rng, 200, 900.0, 60.0);
    ChangepointDetector a, b;
    for (double s : samples) {
        auto oa = a.observe(s);
        auto ob = b.observe(s);
        CHECK(oa.changed == ob.changed);
        CHECK(oa.state_kbps == ob.state_kbps);
        CHECK(oa.map_run_length == ob.map_run_length);
    }
}

TEST_CASE("reset clears accumulated state") {
    ChangepointDetector det;
    det.observe(500.0);
    det.observe(510.0);
    det.reset();
    auto obs = det.observe(900.0);
    CHECK(obs.map_run_length == 1);
    CHECK(obs.state_kbps == 900.0);
    CHECK(det.hypothesis_count() == 2);
}

TEST_CASE("explicit location prior is honored") {
    DetectorConfig cfg;
    cfg.prior.mu0 = 2000.0;
    ChangepointDetector det(cfg);
    auto obs = det.observe(100.0);  // far from the prior location, still fine
    CHECK(obs.map_run_length == 1);
    CHECK(obs.state_kbps == 100.0);
}
