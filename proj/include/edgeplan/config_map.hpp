#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/planner.hpp"

namespace edgeplan {

struct Strategy {
    int exit_point = 0;
    int partition_point = 0;

    friend bool operator==(const Strategy& a, const Strategy& b) {
        return a.exit_point == b.exit_point && a.partition_point == b.partition_point;
    }
    friend bool operator!=(const Strategy& a, const Strategy& b) { return !(a == b); }
};

struct RewardBreakdown {
    double reward = 0.0;
    double latency_ms = 0.0;
    double throughput_fps = 0.0;
    double accuracy = 0.0;
    bool feasible = false;
};

// Scoring rule: exp(accuracy) plus throughput in fps when the latency
// requirement is met (the boundary counts as met), otherwise exactly zero.
inline RewardBreakdown reward_from_latency(double latency_ms, double accuracy,
                                           double latency_requirement_ms) {
    RewardBreakdown rb;
    rb.latency_ms = latency_ms;
    rb.throughput_fps = 1000.0 / latency_ms;
    rb.accuracy = accuracy;
    rb.feasible = latency_ms <= latency_requirement_ms;
    rb.reward = rb.feasible ? std::exp(accuracy) + rb.throughput_fps : 0.0;
    return rb;
}

// Reward of running one strategy at the given bandwidth.
inline RewardBreakdown compute_reward(const BranchyModel& model,
                                      const LatencyPredictor& pred,
                                      const Strategy& s,
                                      double bandwidth_kbps,
                                      double latency_requirement_ms) {
    double lat = estimate_latency(model, pred, s.exit_point, s.partition_point, bandwidth_kbps);
    return reward_from_latency(lat, model.branch(s.exit_point).accuracy, latency_requirement_ms);
}

struct MapEntry {
    double state_kbps = 0.0;
    Strategy strategy;
    double reward = 0.0;
    double accuracy = 0.0;
    double throughput_fps = 0.0;
    bool feasible = false;
};

struct ConfigurationMap {
    double latency_requirement_ms = 0.0;
    std::vector<MapEntry> entries;  // state_kbps strictly increasing
};

// Precomputes the reward-optimal strategy per bandwidth state by full
// enumeration (exits ascending, partitions ascending; on reward ties the
// last candidate enumerated wins). States where nothing meets the
// requirement keep their latency-minimizing strategy and are flagged.
inline ConfigurationMap build_map(const BranchyModel& model,
                                  const LatencyPredictor& pred,
                                  std::vector<double> states_kbps,
                                  double latency_requirement_ms) {
    if (states_kbps.empty()) throw validation_error("state list is empty");
    for (double s : states_kbps)
        if (s <= 0.0) throw validation_error("bandwidth states must be > 0 kbps");
    if (latency_requirement_ms <= 0.0)
        throw validation_error("latency requirement must be > 0 ms");
    std::sort(states_kbps.begin(), states_kbps.end());
    states_kbps.erase(std::unique(states_kbps.begin(), states_kbps.end()), states_kbps.end());

    ConfigurationMap map;
    map.latency_requirement_ms = latency_requirement_ms;
    map.entries.reserve(states_kbps.size());
    for (double state : states_kbps) {
        double reward_max = 0.0;
        Strategy best;
        RewardBreakdown best_rb;
        bool any = false;
        Strategy fastest;
        RewardBreakdown fastest_rb;
        double min_latency = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= model.exit_count(); ++i) {
            const int n = static_cast<int>(model.branch(i).layers.size());
            for (int p = 0; p <= n; ++p) {
                Strategy s{i, p};
                RewardBreakdown rb = compute_reward(model, pred, s, state, latency_requirement_ms);
                if (reward_max <= rb.reward) {
                    reward_max = rb.reward;
                    best = s;
                    best_rb = rb;
                    any = true;
                }
                if (rb.latency_ms < min_latency) {
                    min_latency = rb.latency_ms;
                    fastest = s;
                    fastest_rb = rb;
                }
            }
        }
        MapEntry e;
        e.state_kbps = state;
        if (reward_max > 0.0 && any) {
            e.strategy = best;
            e.reward = best_rb.reward;
            e.accuracy = best_rb.accuracy;
            e.throughput_fps = best_rb.throughput_fps;
            e.feasible = true;
        } else {
            e.strategy = fastest;
            e.reward = 0.0;
            e.accuracy = fastest_rb.accuracy;
            e.throughput_fps = fastest_rb.throughput_fps;
            e.feasible = false;
        }
        map.entries.push_back(e);
    }
    return map;
}

// Entry whose state is closest to the query; on an exact tie the lower
// state wins. Queries outside the covered range take the nearest endpoint.
inline const MapEntry& lookup(const ConfigurationMap& map, double bandwidth_kbps) {
    if (map.entries.empty()) throw validation_error("configuration map is empty");
    const auto& es = map.entries;
    auto it = std::lower_bound(es.begin(), es.end(), bandwidth_kbps,
                               [](const MapEntry& e, double v) { return e.state_kbps < v; });
    if (it == es.begin()) return *it;
    if (it == es.end()) return es.back();
    const MapEntry& hi = *it;
    const MapEntry& lo = *(it - 1);
    double dlo = bandwidth_kbps - lo.state_kbps;
    double dhi = hi.state_kbps - bandwidth_kbps;
    return dhi < dlo ? hi : lo;
}

inline nlohmann::ordered_json map_to_json(const ConfigurationMap& map) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const MapEntry& e : map.entries) {
        nlohmann::ordered_json je;
        je["state_kbps"] = e.state_kbps;
        je["exit_point"] = e.strategy.exit_point;
        je["partition_point"] = e.strategy.partition_point;
        je["reward"] = e.reward;
        je["accuracy"] = e.accuracy;
        je["throughput_fps"] = e.throughput_fps;
        je["feasible"] = e.feasible;
        arr.push_back(std::move(je));
    }
    return arr;
}

inline ConfigurationMap map_from_json(const nlohmann::json& j, double latency_requirement_ms = 0.0) {
    ConfigurationMap map;
    map.latency_requirement_ms = latency_requirement_ms;
    try {
        for (const auto& je : j) {
            MapEntry e;
            e.state_kbps = je.at("state_kbps").get<double>();
            e.strategy.exit_point = je.at("exit_point").get<int>();
            e.strategy.partition_point = je.at("partition_point").get<int>();
            e.reward = je.at("reward").get<double>();
            e.accuracy = je.at("accuracy").get<double>();
            e.throughput_fps = je.at("throughput_fps").get<double>();
            e.feasible = je.at("feasible").get<bool>();
            map.entries.push_back(e);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad configuration map JSON: ") + e.what());
    }
    for (std::size_t i = 1; i < map.entries.size(); ++i)
        if (map.entries[i].state_kbps <= map.entries[i - 1].state_kbps)
            throw validation_error("map states must be strictly increasing");
    return map;
}

inline ConfigurationMap load_map(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    return map_from_json(j);
}

inline void write_map(const ConfigurationMap& map, const std::string& path) {
    write_text_file(path, map_to_json(map).dump(2) + "\n");
}

}  // namespace edgeplan
