#pragma once

#include <limits>
#include <optional>

#include <json.hpp>

#include "edgeplan/latency.hpp"
#include "edgeplan/model.hpp"

namespace edgeplan {

// Joint choice of early-exit branch and partition point. The edge runs
// layers 1..partition_point, the device runs the rest; partition_point 0 is
// device-only and partition_point N is edge-only.
struct CoInferencePlan {
    int exit_point = 0;
    int partition_point = 0;
    double predicted_latency_ms = 0.0;
    double accuracy = 0.0;
};

inline nlohmann::ordered_json plan_to_json(const CoInferencePlan& p) {
    nlohmann::ordered_json j;
    j["exit_point"] = p.exit_point;
    j["partition_point"] = p.partition_point;
    j["predicted_latency_ms"] = p.predicted_latency_ms;
    j["accuracy"] = p.accuracy;
    return j;
}

// End-to-end latency of one (exit, partition) choice at the given uplink
// bandwidth. Transfer cost is bytes*8/kbps = ms. The model input is uploaded
// whenever any prefix runs on the edge; the intermediate output comes back
// over the same link unless the whole branch ran there (the final result is
// small enough that its transfer is not charged).
inline double estimate_latency(const BranchyModel& model,
                               const LatencyPredictor& pred,
                               int exit_point,
                               int partition_point,
                               double bandwidth_kbps) {
    if (bandwidth_kbps <= 0.0)
        throw validation_error("bandwidth must be > 0 kbps");
    const ExitBranch& br = model.branch(exit_point);
    const int n = static_cast<int>(br.layers.size());
    if (partition_point < 0 || partition_point > n)
        throw validation_error("partition point " + std::to_string(partition_point) +
                               " out of range 0.." + std::to_string(n));
    double total = 0.0;
    if (partition_point > 0)
        total += static_cast<double>(model.input_bytes) * 8.0 / bandwidth_kbps;
    for (int j = 0; j < partition_point; ++j)
        total += pred.predict(br.layers[static_cast<std::size_t>(j)], Side::Edge);
    if (partition_point > 0 && partition_point < n)
        total += static_cast<double>(br.layers[static_cast<std::size_t>(partition_point - 1)].output_bytes) *
                 8.0 / bandwidth_kbps;
    for (int j = partition_point; j < n; ++j)
        total += pred.predict(br.layers[static_cast<std::size_t>(j)], Side::Device);
    return total;
}

// Latency-minimizing partition point for one branch (ties go to the smaller
// partition point).
inline CoInferencePlan best_partition(const BranchyModel& model,
                                      const LatencyPredictor& pred,
                                      int exit_point,
                                      double bandwidth_kbps) {
    const ExitBranch& br = model.branch(exit_point);
    const int n = static_cast<int>(br.layers.size());
    CoInferencePlan best;
    best.exit_point = exit_point;
    best.accuracy = br.accuracy;
    best.predicted_latency_ms = std::numeric_limits<double>::infinity();
    for (int p = 0; p <= n; ++p) {
        double lat = estimate_latency(model, pred, exit_point, p, bandwidth_kbps);
        if (lat < best.predicted_latency_ms) {
            best.predicted_latency_ms = lat;
            best.partition_point = p;
        }
    }
    return best;
}

// Picks the most accurate branch that can meet the latency requirement,
// trying exits from deepest to shallowest and taking the first branch whose
// best partition fits. Returns nothing when no combination fits; that is a
// legitimate outcome, not an error.
inline std::optional<CoInferencePlan> plan_static(const BranchyModel& model,
                                                  const LatencyPredictor& pred,
                                                  double bandwidth_kbps,
                                                  double latency_requirement_ms) {
    if (latency_requirement_ms <= 0.0)
        throw validation_error("latency requirement must be > 0 ms");
    for (int i = model.exit_count(); i >= 1; --i) {
        CoInferencePlan plan = best_partition(model, pred, i, bandwidth_kbps);
        if (plan.predicted_latency_ms <= latency_requirement_ms) return plan;
    }
    return std::nullopt;
}

}  // namespace edgeplan
