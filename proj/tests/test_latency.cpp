#include <cmath>
#include <filesystem>

#include <catch2/catch_amalgamated.hpp>

#include "edgeplan/latency.hpp"
#include "support/oracle.hpp"

using namespace edgeplan;

TEST_CASE("profile CSV round trip") {
    std::vector<ProfileRecord> records;
    ProfileRecord r;
    r.kind = LayerKind::Relu;
    r.side = Side::Device;
    r.features = {{"input_size", 1024.0}};
    r.latency_ms = 1.5;
    records.push_back(r);
    r.kind = LayerKind::Pooling;
    r.side = Side::Edge;
    r.features = {{"input_size", 2048.0}, {"output_size", 512.0}};
    r.latency_ms = 0.25;
    records.push_back(r);

    std::string csv = profiles_to_csv(records);
    auto back = profiles_from_csv(csv);
    REQUIRE(back.size() == 2);
    CHECK(back[0].kind == LayerKind::Relu);
    CHECK(back[0].side == Side::Device);
    CHECK(back[0].latency_ms == 1.5);
    CHECK(back[1].features.at("output_size") == 512.0);
    CHECK(profiles_to_csv(back) == csv);
}

TEST_CASE("profile CSV rejects malformed rows") {
    CHECK_THROWS_AS(profiles_from_csv("bogus header\n"), parse_error);
    CHECK_THROWS_AS(profiles_from_csv(std::string(kProfileHeader) + "\nRelu,Device,-1,input_size=4\n"),
                    validation_error);
    CHECK_THROWS_AS(profiles_from_csv(std::string(kProfileHeader) + "\nRelu,Device,1\n"),
                    parse_error);
    CHECK_THROWS_AS(
        profiles_from_csv(std::string(kProfileHeader) + "\nRelu,Sideways,1,input_size=4\n"),
        parse_error);
}

TEST_CASE("noiseless fit recovers the generating coefficients") {
    auto truth = ground_truth_default();
    auto records = generate_synthetic_profiles(truth, 60, 0.0, 99);
    auto pred = fit(records);
    CHECK(pred.skipped.empty());
    for (auto kind : all_layer_kinds()) {
        for (auto side : {Side::Device, Side::Edge}) {
            const auto& want = truth.at(kind, side);
            REQUIRE(pred.has(kind, side));
            const auto& got = pred.regression(kind, side);
            CHECK_THAT(got.intercept,
                       Catch::Matchers::WithinRel(want.intercept, 1e-9));
            REQUIRE(got.weights.size() == want.weights.size());
            for (std::size_t k = 0; k < want.weights.size(); ++k)
                CHECK_THAT(got.weights[k], Catch::Matchers::WithinRel(want.weights[k], 1e-9));
            CHECK(got.rmse < 1e-9);
            CHECK(got.samples == 60);
        }
    }
}

TEST_CASE("noisy fit stays close to the generating coefficients") {
    auto truth = ground_truth_default();
    auto records = generate_synthetic_profiles(truth, 100, 0.01, 7);
    auto pred = fit(records);
    for (auto kind : all_layer_kinds()) {
        for (auto side : {Side::Device, Side::Edge}) {
            const auto& want = truth.at(kind, side);
            const auto& got = pred.regression(kind, side);
            CHECK_THAT(got.intercept, Catch::Matchers::WithinRel(want.intercept, 0.05));
            for (std::size_t k = 0; k < want.weights.size(); ++k)
                CHECK_THAT(got.weights[k], Catch::Matchers::WithinRel(want.weights[k], 0.05));

            // reported RMSE must match an independent recomputation
            double sq = 0.0;
            int n = 0;
            for (const auto& r : records) {
                if (r.kind != kind || r.side != side) continue;
                double yhat = got.intercept;
                const auto& names = feature_names(kind);
                for (std::size_t k = 0; k < names.size(); ++k)
                    yhat += got.weights[k] * r.features.at(names[k]);
                sq += (r.latency_ms - yhat) * (r.latency_ms - yhat);
                ++n;
            }
            CHECK_THAT(got.rmse, Catch::Matchers::WithinRel(std::sqrt(sq / n), 1e-12));
        }
    }

    // held-out probes land close to the generating model, on the noise scale
    auto holdout = generate_synthetic_profiles(truth, 5, 0.0, 8);
    for (const auto& r : holdout) {
        LayerSpec probe;
        probe.kind = r.kind;
        probe.features = r.features;
        double got = pred.predict(probe, r.side);
        double rmse = pred.regression(r.kind, r.side).rmse;
        CHECK(std::abs(got - r.latency_ms) <= 3.0 * rmse + 1e-6);
    }
}

TEST_CASE("fit skips pairs with too few samples") {
    auto truth = ground_truth_default();
    auto records = generate_synthetic_profiles(truth, 30, 0.0, 4);
    // keep only two Relu/Device rows: 2 < 1 feature + 2
    std::vector<ProfileRecord> pruned;
    int kept = 0;
    for (const auto& r : records) {
        if (r.kind == LayerKind::Relu && r.side == Side::Device) {
            if (kept++ >= 2) continue;
        }
        pruned.push_back(r);
    }
    auto pred = fit(pruned);
    CHECK(!pred.has(LayerKind::Relu, Side::Device));
    REQUIRE(pred.skipped.size() == 1);
    CHECK(pred.skipped[0].kind == LayerKind::Relu);
    CHECK(pred.skipped[0].side == Side::Device);
    CHECK(pred.skipped[0].samples == 2);
    LayerSpec probe;
    probe.kind = LayerKind::Relu;
    probe.features = {{"input_size", 10.0}};
    CHECK_THROWS_AS(pred.predict(probe, Side::Device), predict_error);
}

TEST_CASE("fit reports degenerate designs") {
    // All rows share the same feature value: no spread, singular normal matrix.
    std::vector<ProfileRecord> records;
    for (int i = 0; i < 10; ++i) {
        ProfileRecord r;
        r.kind = LayerKind::Relu;
        r.side = Side::Edge;
        r.features = {{"input_size", 512.0}};
        r.latency_ms = 1.0 + 0.001 * i;
        records.push_back(r);
    }
    CHECK_THROWS_AS(fit(records), fit_error);
}

TEST_CASE("prediction clamps below zero and validates features") {
    LayerRegression reg;
    reg.intercept = -5.0;
    reg.weights = {0.001};
    LatencyPredictor pred;
    pred.set(LayerKind::Relu, Side::Edge, reg);
    LayerSpec probe;
    probe.kind = LayerKind::Relu;
    probe.features = {{"input_size", 100.0}};
    CHECK(pred.predict(probe, Side::Edge) == 0.0);
    probe.features = {{"wrong", 1.0}};
    CHECK_THROWS_AS(pred.predict(probe, Side::Edge), validation_error);
}

TEST_CASE("predictor JSON round trip") {
    auto truth = ground_truth_default();
    auto records = generate_synthetic_profiles(truth, 40, 0.005, 11);
    auto pred = fit(records);
    auto j = predictor_to_json(pred);
    auto back = predictor_from_json(j);
    for (auto kind : all_layer_kinds()) {
        for (auto side : {Side::Device, Side::Edge}) {
            const auto& a = pred.regression(kind, side);
            const auto& b = back.regression(kind, side);
            CHECK(a.intercept == b.intercept);
            CHECK(a.weights == b.weights);
            CHECK(a.rmse == b.rmse);
            CHECK(a.samples == b.samples);
        }
    }
    CHECK(predictor_to_json(back) == j);
}

TEST_CASE("device20x preset is a uniform scaling of its edge side") {
    auto truth = ground_truth_device20x();
    for (auto kind : all_layer_kinds()) {
        const auto& edge = truth.at(kind, Side::Edge);
        const auto& device = truth.at(kind, Side::Device);
        CHECK(device.intercept == 20.0 * edge.intercept);
        REQUIRE(device.weights.size() == edge.weights.size());
        for (std::size_t k = 0; k < edge.weights.size(); ++k)
            CHECK(device.weights[k] == 20.0 * edge.weights[k]);
    }
    CHECK_THROWS_AS(ground_truth_preset("nope"), validation_error);
}

TEST_CASE("synthetic profiles are deterministic per seed") {
    auto truth = ground_truth_default();
    auto a = generate_synthetic_profiles(truth, 10, 0.01, 42);
    auto b = generate_synthetic_profiles(truth, 10, 0.01, 42);
    auto c = generate_synthetic_profiles(truth, 10, 0.01, 43);
    CHECK(profiles_to_csv(a) == profiles_to_csv(b));
    CHECK(profiles_to_csv(a) != profiles_to_csv(c));
}
